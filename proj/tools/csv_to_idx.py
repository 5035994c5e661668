#!/usr/bin/env python3
"""Convert a CSV of flattened 28x28 digits (784 pixel columns, label last) into a gzipped
IDX image/label pair readable by `swkrr mnist`."""
import argparse
import csv
import gzip
import struct


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("csv", help="input CSV, optionally gzip-compressed")
    ap.add_argument("images", help="output images-idx3-ubyte.gz")
    ap.add_argument("labels", help="output labels-idx1-ubyte.gz")
    ap.add_argument("--side", type=int, default=28)
    args = ap.parse_args()

    opener = gzip.open if args.csv.endswith(".gz") else open
    pixels, labels = bytearray(), bytearray()
    n = args.side * args.side
    with opener(args.csv, "rt") as f:
        for row in csv.reader(f):
            if len(row) != n + 1:
                raise SystemExit(f"expected {n + 1} columns, got {len(row)}")
            pixels.extend(int(float(v)) for v in row[:n])
            labels.append(int(float(row[n])))

    count = len(labels)
    with gzip.open(args.images, "wb") as f:
        f.write(struct.pack(">IIII", 0x803, count, args.side, args.side))
        f.write(pixels)
    with gzip.open(args.labels, "wb") as f:
        f.write(struct.pack(">II", 0x801, count))
        f.write(labels)
    print(f"{count} images written")


if __name__ == "__main__":
    main()
