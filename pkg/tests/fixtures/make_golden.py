"""Regenerate fixture_1000.csv and golden_1000.byst.

Run from the repository root:  python3 tests/fixtures/make_golden.py
The store file is the reproducibility anchor: ingesting the CSV with the
pinned schema must reproduce it byte for byte on any machine.
"""

import os

import numpy as np

from bytestore.engine import ColumnSpec, Schema, ingest
from bytestore.store import write_store

HERE = os.path.dirname(os.path.abspath(__file__))
CSV_PATH = os.path.join(HERE, "fixture_1000.csv")
STORE_PATH = os.path.join(HERE, "golden_1000.byst")

SCHEMA = Schema([
    ColumnSpec("order_id", Schema.parse_kind("numeric"), "bitpacked"),
    ColumnSpec("qty", Schema.parse_kind("numeric"), "byteslice"),
    ColumnSpec("price", Schema.parse_kind("numeric"), "vbp"),
    ColumnSpec("flag", Schema.parse_kind("numeric"), "pevbp"),
    ColumnSpec("amount", Schema.parse_kind("numeric"), "ppvbs"),
    ColumnSpec("region", Schema.parse_kind("categorical"), "ppvbs"),
    ColumnSpec("sku", Schema.parse_kind("ordered_string"), "ppvbs"),
])


def write_fixture_csv():
    rng = np.random.default_rng(20260401)
    n = 1000
    zipf_w = 1.0 / np.arange(1, 301) ** 1.1
    zipf_w /= zipf_w.sum()
    cols = {
        "order_id": np.arange(n) * 3 + 11,
        "qty": rng.integers(1, 97, size=n),
        "price": rng.integers(100, 100_000, size=n),
        "flag": rng.integers(0, 7, size=n),
        "amount": rng.choice(300, size=n, p=zipf_w),
        "region": ["zone%02d" % z for z in rng.choice(30, size=n,
                                                      p=make_zone_weights())],
        "sku": ["SKU-%04d" % v for v in rng.integers(0, 400, size=n)],
    }
    with open(CSV_PATH, "w") as fh:
        fh.write(",".join(cols) + "\n")
        for i in range(n):
            fh.write(",".join(str(cols[k][i]) for k in cols) + "\n")


def make_zone_weights():
    w = 1.0 / np.arange(1, 31) ** 0.9
    return w / w.sum()


def main():
    write_fixture_csv()
    store, _ = ingest(CSV_PATH, SCHEMA, policy="forced")
    write_store(STORE_PATH, store)
    print(f"wrote {CSV_PATH} and {STORE_PATH} "
          f"({os.path.getsize(STORE_PATH)} bytes)")


if __name__ == "__main__":
    main()
