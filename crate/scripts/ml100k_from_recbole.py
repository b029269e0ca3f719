#!/usr/bin/env python3
"""Rebuild MovieLens-100k files (u.data, u.item, u.user) from the copy of the
dataset bundled in the `recbole` wheel.

Use this when files.grouplens.org is unreachable. Ratings, users and item
genres are identical to the original release; `u.item` only carries the
release year, so release dates become `01-Jan-YYYY` and the video-release and URL columns
are empty.

    pip download --no-deps recbole -d /tmp/recbole
    python3 scripts/ml100k_from_recbole.py /tmp/recbole/recbole-*.whl data/ml-100k
"""
import os
import sys
import zipfile

GENRES = [
    "unknown", "Action", "Adventure", "Animation", "Children's", "Comedy",
    "Crime", "Documentary", "Drama", "Fantasy", "Film-Noir", "Horror",
    "Musical", "Mystery", "Romance", "Sci-Fi", "Thriller", "War", "Western",
]
PREFIX = "recbole/dataset_example/ml-100k/ml-100k."


def rows(z, ext):
    text = z.read(PREFIX + ext).decode("utf-8")
    lines = text.splitlines()
    return [line.split("\t") for line in lines[1:] if line]


def main():
    wheel, out = sys.argv[1], sys.argv[2]
    os.makedirs(out, exist_ok=True)
    z = zipfile.ZipFile(wheel)

    with open(os.path.join(out, "u.data"), "w", encoding="latin-1", newline="\n") as f:
        for user, item, rating, ts in rows(z, "inter"):
            f.write(f"{user}\t{item}\t{int(float(rating))}\t{int(float(ts))}\n")

    with open(os.path.join(out, "u.user"), "w", encoding="latin-1", newline="\n") as f:
        for user, age, gender, occupation, zipcode in rows(z, "user"):
            f.write(f"{user}|{age}|{gender}|{occupation}|{zipcode}\n")

    with open(os.path.join(out, "u.item"), "w", encoding="latin-1", newline="\n") as f:
        for item, title, year, classes in rows(z, "item"):
            if year.isdigit():
                full_title = f"{title} ({year})"
                release = f"01-Jan-{year}"
            else:
                full_title, release = "unknown", ""
            present = set(classes.split())
            flags = "|".join("1" if g in present else "0" for g in GENRES)
            f.write(f"{item}|{full_title}|{release}|||{flags}\n")


if __name__ == "__main__":
    main()
