#!/usr/bin/env python3
"""Fetch and normalize the benchmark datasets into data/*.csv.

Each dataset lands as a plain CSV with named columns and human-readable
class labels, matching the schema files under schemas/.  Raw downloads are
cached in --cache-dir and verified by SHA-256 before conversion, so the
generated CSVs are reproducible byte for byte.

iris and wine come from scikit-learn's bundled copies of the UCI data and
need no network at all.  new_thyroid, heart_statlog, and haberman are pulled
from the PMLB repository.  If your environment routes GitHub through a
proxy, point --mirror-base at it (it replaces the default URL prefix).

Cryotherapy and the toddler autism screening set cannot be fetched here:
the UCI copy is an .xlsx and the autism data sits behind a Kaggle login.
See data/README.md for the manual conversion steps; schemas for both are
shipped so a converted CSV drops straight in.
"""

import argparse
import csv
import gzip
import hashlib
import io
import sys
from pathlib import Path

PMLB_BASE = "https://raw.githubusercontent.com/EpistasisLab/pmlb/master/datasets"

# SHA-256 of the raw .tsv.gz files as published by PMLB.
RAW_CHECKSUMS = {
    "new_thyroid": "7164f21d0c4a5bd5fdfcab5918cd1e070314750bdfab0b9a32c2c7f1b3df5e87",
    "heart_statlog": "8961cb48eb662faa5d55d7849ee8be88d8b2a3eeebd383cfa5df38c60133ebcb",
    "haberman": "2f44ac12e09d2fd09d9ac70231cecbfbc333356339dec0509ad1ed96e36e94c0",
}


def sha256_of(path: Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            digest.update(chunk)
    return digest.hexdigest()


def fetch_raw(name: str, base: str, cache_dir: Path) -> Path:
    """Download (or reuse) the raw PMLB archive and verify its checksum."""
    cache_dir.mkdir(parents=True, exist_ok=True)
    target = cache_dir / f"{name}.tsv.gz"
    if not target.exists():
        import requests

        url = f"{base}/{name}/{name}.tsv.gz"
        print(f"  fetching {url}")
        reply = requests.get(url, timeout=60)
        reply.raise_for_status()
        target.write_bytes(reply.content)
    actual = sha256_of(target)
    expected = RAW_CHECKSUMS[name]
    if actual != expected:
        sys.exit(
            f"checksum mismatch for {target}:\n  got      {actual}\n"
            f"  expected {expected}\ndelete the file and retry"
        )
    return target


def read_tsv_gz(path: Path):
    with gzip.open(path, "rt") as fh:
        rows = list(csv.reader(fh, delimiter="\t"))
    return rows[0], rows[1:]


def write_csv(path: Path, header, rows):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)
    print(f"  wrote {path} ({len(rows)} rows, sha256 {sha256_of(path)[:12]}...)")


def clean_number(cell: str) -> str:
    """Trim trailing '.0' noise that PMLB adds to integer-valued columns."""
    if cell.endswith(".0") and cell[:-2].lstrip("-").isdigit():
        return cell[:-2]
    return cell


def convert_new_thyroid(raw: Path, out: Path):
    _, rows = read_tsv_gz(raw)
    labels = {"1": "normal", "2": "hyperthyroid", "3": "hypothyroid"}
    header = [
        "t3_resin_uptake",
        "total_thyroxin",
        "total_triiodothyronine",
        "basal_tsh",
        "tsh_delta",
        "diagnosis",
    ]
    converted = [
        [clean_number(c) for c in row[:5]] + [labels[row[5]]] for row in rows
    ]
    assert len(converted) == 215
    write_csv(out, header, converted)


def convert_heart_statlog(raw: Path, out: Path):
    _, rows = read_tsv_gz(raw)
    labels = {"0": "absent", "1": "present"}
    header = [
        "age",
        "sex",
        "chest_pain",
        "resting_bp",
        "cholesterol",
        "fasting_blood_sugar",
        "resting_ecg",
        "max_heart_rate",
        "exercise_angina",
        "oldpeak",
        "slope",
        "major_vessels",
        "thal",
        "disease",
    ]
    converted = [
        [clean_number(c) for c in row[:13]] + [labels[row[13]]] for row in rows
    ]
    assert len(converted) == 270
    write_csv(out, header, converted)


def convert_haberman(raw: Path, out: Path):
    _, rows = read_tsv_gz(raw)
    labels = {"1": "survived", "2": "died"}
    header = ["age", "operation_year", "positive_nodes", "survival"]
    converted = [
        [clean_number(c) for c in row[:3]] + [labels[row[3]]] for row in rows
    ]
    assert len(converted) == 306
    write_csv(out, header, converted)


def format_value(v) -> str:
    """Render sklearn's float64 values compactly but losslessly."""
    v = float(v)
    if v == int(v):
        return str(int(v))
    return repr(v)


def convert_iris(out: Path):
    from sklearn.datasets import load_iris

    bunch = load_iris()
    header = [
        "sepal_length",
        "sepal_width",
        "petal_length",
        "petal_width",
        "species",
    ]
    rows = [
        [format_value(v) for v in x] + [bunch.target_names[t]]
        for x, t in zip(bunch.data, bunch.target)
    ]
    assert len(rows) == 150
    write_csv(out, header, rows)


def convert_wine(out: Path):
    from sklearn.datasets import load_wine

    bunch = load_wine()
    header = [
        "alcohol",
        "malic_acid",
        "ash",
        "alcalinity_of_ash",
        "magnesium",
        "total_phenols",
        "flavanoids",
        "nonflavanoid_phenols",
        "proanthocyanins",
        "color_intensity",
        "hue",
        "od280_od315",
        "proline",
        "cultivar",
    ]
    rows = [
        [format_value(v) for v in x] + [f"cultivar_{t + 1}"]
        for x, t in zip(bunch.data, bunch.target)
    ]
    assert len(rows) == 178
    write_csv(out, header, rows)


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--data-dir", default="data", type=Path)
    parser.add_argument("--cache-dir", default=Path(".cache/downloads"), type=Path)
    parser.add_argument(
        "--mirror-base",
        default=PMLB_BASE,
        help="base URL for the PMLB datasets (default: %(default)s)",
    )
    parser.add_argument(
        "--only", action="append", help="limit to specific dataset names"
    )
    args = parser.parse_args()
    args.data_dir.mkdir(parents=True, exist_ok=True)

    jobs = {
        "iris": lambda: convert_iris(args.data_dir / "iris.csv"),
        "wine": lambda: convert_wine(args.data_dir / "wine.csv"),
        "new_thyroid": lambda: convert_new_thyroid(
            fetch_raw("new_thyroid", args.mirror_base, args.cache_dir),
            args.data_dir / "new_thyroid.csv",
        ),
        "heart_statlog": lambda: convert_heart_statlog(
            fetch_raw("heart_statlog", args.mirror_base, args.cache_dir),
            args.data_dir / "heart_statlog.csv",
        ),
        "haberman": lambda: convert_haberman(
            fetch_raw("haberman", args.mirror_base, args.cache_dir),
            args.data_dir / "haberman.csv",
        ),
    }
    selected = args.only or list(jobs)
    for name in selected:
        if name not in jobs:
            sys.exit(f"unknown dataset '{name}' (choose from {', '.join(jobs)})")
        print(f"{name}:")
        jobs[name]()


if __name__ == "__main__":
    main()
