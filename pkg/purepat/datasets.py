"""Builders of the benchmark subsets of public intrusion-detection corpora.

Data files are user-supplied; nothing is downloaded.

- NSL-KDD slice: first 10,000 rows of KDDTrain+ followed by the first 5,000
  rows of KDDTest+ (41 features, the difficulty column is dropped).
- UNSW-NB15 subset: first 10,000 normal flows of the four CSV shards, plus up
  to 500 anomalies of each of the nine attack categories (47 features).
"""

import pandas as pd

from .errors import DataError


NSL_KDD_COLUMNS = [
    'duration', 'protocol_type', 'service', 'flag', 'src_bytes', 'dst_bytes',
    'land', 'wrong_fragment', 'urgent', 'hot', 'num_failed_logins', 'logged_in',
    'num_compromised', 'root_shell', 'su_attempted', 'num_root',
    'num_file_creations', 'num_shells', 'num_access_files', 'num_outbound_cmds',
    'is_host_login', 'is_guest_login', 'count', 'srv_count', 'serror_rate',
    'srv_serror_rate', 'rerror_rate', 'srv_rerror_rate', 'same_srv_rate',
    'diff_srv_rate', 'srv_diff_host_rate', 'dst_host_count',
    'dst_host_srv_count', 'dst_host_same_srv_rate', 'dst_host_diff_srv_rate',
    'dst_host_same_src_port_rate', 'dst_host_srv_diff_host_rate',
    'dst_host_serror_rate', 'dst_host_srv_serror_rate', 'dst_host_rerror_rate',
    'dst_host_srv_rerror_rate', 'label', 'difficulty',
]

UNSW_NB15_COLUMNS = [
    'srcip', 'sport', 'dstip', 'dsport', 'proto', 'state', 'dur', 'sbytes',
    'dbytes', 'sttl', 'dttl', 'sloss', 'dloss', 'service', 'Sload', 'Dload',
    'Spkts', 'Dpkts', 'swin', 'dwin', 'stcpb', 'dtcpb', 'smeansz', 'dmeansz',
    'trans_depth', 'res_bdy_len', 'Sjit', 'Djit', 'Stime', 'Ltime', 'Sintpkt',
    'Dintpkt', 'tcprtt', 'synack', 'ackdat', 'is_sm_ips_ports', 'ct_state_ttl',
    'ct_flw_http_mthd', 'is_ftp_login', 'ct_ftp_cmd', 'ct_srv_src',
    'ct_srv_dst', 'ct_dst_ltm', 'ct_src_ltm', 'ct_src_dport_ltm',
    'ct_dst_sport_ltm', 'ct_dst_src_ltm', 'attack_cat', 'Label',
]

UNSW_NB15_CATEGORIES = [
    'Fuzzers', 'Analysis', 'Backdoor', 'DoS', 'Exploits', 'Generic',
    'Reconnaissance', 'Shellcode', 'Worms',
]


def _read_headerless(path, columns):
    try:
        table = pd.read_csv(path, header=None, dtype=str, keep_default_na=False,
                            na_filter=False, encoding='utf-8', encoding_errors='replace')
    except pd.errors.EmptyDataError:
        raise DataError(f'{path} is empty.')
    if table.shape[1] != len(columns):
        raise DataError(f'{path} has {table.shape[1]} columns, expected {len(columns)}.')
    table.columns = columns
    return table


def load_nsl_kdd(path):
    """One headerless NSL-KDD file (KDDTrain+.txt / KDDTest+.txt), named
    columns, without the difficulty column."""
    table = _read_headerless(path, NSL_KDD_COLUMNS)
    return table.drop(columns='difficulty')


def nsl_kdd_slice(train_path, test_path, n_train=10000, n_test=5000):
    """Consecutive-rows slice: n_train training rows then n_test test rows."""
    train = load_nsl_kdd(train_path).iloc[:n_train]
    test = load_nsl_kdd(test_path).iloc[:n_test]
    return pd.concat([train, test], ignore_index=True)


def unsw_nb15_subset(shard_paths, n_normal=10000, per_category=500):
    """Normal flows and per-category anomalies of the UNSW-NB15 shards.

    Selected rows keep their order in the concatenated shards; the
    `attack_cat` column is dropped and `Label` (0 normal / 1 attack) kept.
    """
    table = pd.concat([_read_headerless(path, UNSW_NB15_COLUMNS)
                       for path in shard_paths], ignore_index=True)
    labels = table['Label'].str.strip()
    # 'Backdoor' is also spelled 'Backdoors' in the shards
    categories = table['attack_cat'].str.strip().str.lower().str.rstrip('s')

    normal = table.index[labels == '0'][:n_normal]
    selected = list(normal)
    for category in UNSW_NB15_CATEGORIES:
        is_category = (labels == '1') & (categories == category.lower().rstrip('s'))
        selected.extend(table.index[is_category][:per_category])

    subset = table.loc[sorted(selected)].drop(columns='attack_cat')
    return subset.reset_index(drop=True)
