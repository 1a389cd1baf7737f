#!/usr/bin/env python3
"""Downloads and prepares the three benchmark datasets into ./data.

Needs outbound network access (LIBSVM page, UCI archive, tempeh blob
storage). Produces:

  data/a9a.libsvm + data/a9a.groups   48,842 x 123, groups = sex
  data/bank.libsvm + data/bank.groups 41,188 rows, groups = age in [25,60]
  data/law_school.csv                 20,798 rows, label pass_bar, group race

a9a is the concatenation of the LIBSVM train and test files (row order
preserved); the sex side file is read off the raw Adult census files,
which a9a encodes row-for-row. The bank encoding one-hot expands the
categorical columns; the published attribute count (54) comes from a
preprocessing the source paper does not specify, so this script prints
the shape it achieved and flags any mismatch instead of guessing
silently.
"""

import csv
import io
import sys
import urllib.request
from pathlib import Path

DATA = Path(__file__).resolve().parent.parent / "data"

LIBSVM = "https://www.csie.ntu.edu.tw/~cjlin/libsvmtools/datasets/binary"
UCI_ADULT = "https://archive.ics.uci.edu/ml/machine-learning-databases/adult"
UCI_BANK = ("https://archive.ics.uci.edu/ml/machine-learning-databases/"
            "00222/bank-additional.zip")
LAW_URLS = [
    # tempeh's mirror of the LSAC National Longitudinal Bar Passage Study
    "https://raw.githubusercontent.com/microsoft/tempeh/master/datasets/lawschool.csv",
]


def fetch(url: str) -> bytes:
    print(f"  fetching {url}")
    with urllib.request.urlopen(url, timeout=120) as r:
        return r.read()


def prepare_a9a() -> None:
    print("a9a:")
    train = fetch(f"{LIBSVM}/a9a").decode()
    test = fetch(f"{LIBSVM}/a9a.t").decode()
    rows = [ln for ln in (train + test).splitlines() if ln.strip()]
    (DATA / "a9a.libsvm").write_text("\n".join(rows) + "\n")

    adult_train = fetch(f"{UCI_ADULT}/adult.data").decode()
    adult_test = fetch(f"{UCI_ADULT}/adult.test").decode()
    sexes = []
    for blob, skip_header in ((adult_train, False), (adult_test, True)):
        lines = [ln for ln in blob.splitlines() if ln.strip() and ln.strip() != "."]
        if skip_header and lines and lines[0].startswith("|"):
            lines = lines[1:]
        for ln in lines:
            cells = [c.strip() for c in ln.split(",")]
            if len(cells) < 10:
                continue
            sexes.append("1" if cells[9] == "Female" else "2")
    if len(sexes) != len(rows):
        sys.exit(f"a9a: {len(rows)} feature rows vs {len(sexes)} sex rows")
    (DATA / "a9a.groups").write_text("\n".join(sexes) + "\n")
    print(f"  wrote {len(rows)} rows (expect 48842)")


def prepare_bank() -> None:
    import zipfile

    print("bank:")
    blob = fetch(UCI_BANK)
    with zipfile.ZipFile(io.BytesIO(blob)) as z:
        raw = z.read("bank-additional/bank-additional-full.csv").decode()
    reader = csv.reader(io.StringIO(raw), delimiter=";")
    header = next(reader)
    table = [row for row in reader if row]

    numeric = ["duration", "campaign", "pdays", "previous", "emp.var.rate",
               "cons.price.idx", "cons.conf.idx", "euribor3m", "nr.employed"]
    categorical = ["job", "marital", "education", "default", "housing", "loan",
                   "contact", "month", "day_of_week", "poutcome"]
    col = {name: header.index(name) for name in header}

    levels = {c: sorted({row[col[c]] for row in table}) for c in categorical}
    # drop-first one-hot keeps the design matrix full rank
    dummies = [(c, lv) for c in categorical for lv in levels[c][1:]]

    out_rows = []
    groups = []
    for row in table:
        feats = [row[col[c]] for c in numeric]
        feats += ["1" if row[col[c]] == lv else "0" for c, lv in dummies]
        age = float(row[col["age"]])
        groups.append("1" if 25 <= age <= 60 else "2")
        label = "+1" if row[col["y"]] == "yes" else "-1"
        svm = [label] + [f"{j + 1}:{v}" for j, v in enumerate(feats) if float(v) != 0.0]
        out_rows.append(" ".join(svm))
    d = len(numeric) + len(dummies)
    (DATA / "bank.libsvm").write_text("\n".join(out_rows) + "\n")
    (DATA / "bank.groups").write_text("\n".join(groups) + "\n")
    print(f"  wrote {len(out_rows)} rows with d={d} (published count: 54)")
    if d != 54:
        print("  WARNING: encoded dimension differs from the published table;"
              " the source preprocessing is not documented")


def prepare_law_school() -> None:
    print("law school:")
    last_err = None
    for url in LAW_URLS:
        try:
            raw = fetch(url).decode()
            break
        except Exception as e:  # noqa: BLE001
            last_err = e
    else:
        sys.exit(f"law school download failed: {last_err}")

    reader = csv.DictReader(io.StringIO(raw))
    feature_cols = ["decile1b", "decile3", "lsat", "ugpa", "zfygpa", "zgpa",
                    "fulltime", "fam_inc", "male", "tier", "index6040", "indxgrp"]
    rows = []
    for rec in reader:
        out = {}
        ok = True
        for c in feature_cols:
            v = rec.get(c, "")
            try:
                out[c] = float(v)
            except (TypeError, ValueError):
                ok = False
                break
        if not ok:
            continue
        out["pass_bar"] = rec.get("pass_bar", rec.get("passbar", ""))
        out["race"] = "white" if rec.get("race", "") in ("7", "white", "White") else "nonwhite"
        rows.append(out)

    with (DATA / "law_school.csv").open("w", newline="") as f:
        w = csv.DictWriter(f, fieldnames=feature_cols + ["pass_bar", "race"])
        w.writeheader()
        w.writerows(rows)
    print(f"  wrote {len(rows)} rows with {len(feature_cols)} features"
          " (published count: 20798 x 12)")
    if len(rows) != 20798:
        print("  WARNING: row count differs from the published table; adjust"
              " the column list/filters for your mirror of the study data")


def main() -> None:
    DATA.mkdir(exist_ok=True)
    prepare_a9a()
    prepare_bank()
    prepare_law_school()
    print("done; point DCFAIR_DATA_DIR at", DATA)


if __name__ == "__main__":
    main()
