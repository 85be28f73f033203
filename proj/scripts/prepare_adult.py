"""Rebuild data/adult.csv from the UCI Adult files.

The raw adult.data / adult.test are taken from the `responsibly` 0.1.2 wheel,
which vendors the UCI release unchanged. Both files are concatenated (48,842
rows), fields are whitespace-stripped and the trailing "." on adult.test
labels is dropped. Missing values stay as "?".

    pip download responsibly==0.1.2 --no-deps -d /tmp/pkgs
    python3 scripts/prepare_adult.py /tmp/pkgs/responsibly-0.1.2-py3-none-any.whl data/adult.csv

Expected sha256 of the output:
6f8f2babc5ee744afd03f6d978d8d6b3e3b0aae240d931c4976a9cce7af0d347
"""

import csv
import hashlib
import io
import sys
import zipfile

COLUMNS = [
    "age", "workclass", "fnlwgt", "education", "education-num", "marital-status",
    "occupation", "relationship", "race", "sex", "capital-gain", "capital-loss",
    "hours-per-week", "native-country", "income",
]


def rows(text):
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("|"):  # adult.test opens with a comment line
            continue
        cells = [c.strip() for c in line.split(",")]
        if len(cells) != len(COLUMNS):
            continue
        cells[-1] = cells[-1].rstrip(".")
        yield cells


def main(wheel, out):
    with zipfile.ZipFile(wheel) as z:
        parts = [z.read(f"responsibly/dataset/adult/{name}").decode("utf-8") for name in ("adult.data", "adult.test")]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(COLUMNS)
    n = 0
    for part in parts:
        for r in rows(part):
            w.writerow(r)
            n += 1
    data = buf.getvalue().encode("utf-8")
    with open(out, "wb") as f:
        f.write(data)
    print(f"{n} rows, sha256 {hashlib.sha256(data).hexdigest()}")


if __name__ == "__main__":
    if len(sys.argv) != 3:
        sys.exit("usage: prepare_adult.py <responsibly wheel> <out.csv>")
    main(sys.argv[1], sys.argv[2])
