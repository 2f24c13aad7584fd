#!/usr/bin/env python3
"""Download the Statlog German credit data and convert it to data/german.csv.

The raw file (german.data) is space-separated with coded categorical levels
and an outcome column where 1 = good (repaid) and 2 = bad (defaulted). The
output CSV has named columns, a binary `repaid` target (1 = repaid), and the
numeric `age` column used to derive the sensitive attribute (age < 25).
"""

import csv
import pathlib
import sys
import urllib.request

URL = (
    "https://archive.ics.uci.edu/ml/machine-learning-databases/"
    "statlog/german/german.data"
)

COLUMNS = [
    "checking_status", "duration", "credit_history", "purpose",
    "credit_amount", "savings", "employment_since", "installment_rate",
    "personal_status", "other_debtors", "residence_since", "property",
    "age", "other_installment", "housing", "existing_credits", "job",
    "num_dependents", "telephone", "foreign_worker",
]


def main() -> int:
    out_path = pathlib.Path(sys.argv[1] if len(sys.argv) > 1 else "data/german.csv")
    out_path.parent.mkdir(parents=True, exist_ok=True)

    print(f"fetching {URL}")
    raw = urllib.request.urlopen(URL, timeout=60).read().decode("ascii")

    rows = []
    for line in raw.splitlines():
        fields = line.split()
        if not fields:
            continue
        if len(fields) != len(COLUMNS) + 1:
            raise SystemExit(f"unexpected field count {len(fields)}: {line!r}")
        outcome = fields[-1]
        if outcome not in ("1", "2"):
            raise SystemExit(f"unexpected outcome {outcome!r}")
        rows.append(fields[:-1] + ["1" if outcome == "1" else "0"])

    if len(rows) != 1000:
        raise SystemExit(f"expected 1000 rows, got {len(rows)}")

    with out_path.open("w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(COLUMNS + ["repaid"])
        writer.writerows(rows)

    n_default = sum(1 for r in rows if r[-1] == "0")
    n_young = sum(1 for r in rows if int(r[COLUMNS.index("age")]) < 25)
    print(f"wrote {out_path}: {len(rows)} rows, "
          f"default rate {n_default / len(rows):.3f}, "
          f"age<25 rate {n_young / len(rows):.3f}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
