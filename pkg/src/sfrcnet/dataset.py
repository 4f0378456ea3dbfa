"""Binary dataset container, manifest and train/val/test splitting.

Container layout (all little-endian):

    magic "SFRD" | u32 version | u64 record count
    per record:
        u64 seed | u32 n_rows
        6 x f64 orientation components (a11, a22, a33, a12, a13, a23)
        f64 fiber volume fraction
        n_rows x 6 f64 strain block (row-major, plain components)
        n_rows x 6 f64 stress block
        u8 status flag (0 ok, 1 simulation failed)

A human-readable JSON manifest lives next to the data file and is sufficient
to regenerate every record's inputs from (master seed, index).
"""
import json
import struct
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .pathgen import SampleRecord

MAGIC = b"SFRD"
FORMAT_VERSION = 1


@dataclass
class Dataset:
    records: list
    manifest: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.records)

    def ok_indices(self):
        return [i for i, r in enumerate(self.records) if r.status == 0]


def manifest_path(path):
    return Path(str(path) + ".manifest.json")


def write_dataset(path, records, manifest=None):
    """Write records and the adjacent manifest; returns the manifest dict."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<IQ", FORMAT_VERSION, len(records)))
        for rec in records:
            stress = rec.stress
            if stress is None:
                stress = np.zeros_like(rec.strain)
            fh.write(struct.pack("<QI", rec.seed & 0xFFFFFFFFFFFFFFFF,
                                 rec.n_rows))
            fh.write(np.asarray(rec.orientation, dtype="<f8").tobytes())
            fh.write(struct.pack("<d", rec.vf))
            fh.write(np.ascontiguousarray(rec.strain, dtype="<f8").tobytes())
            fh.write(np.ascontiguousarray(stress, dtype="<f8").tobytes())
            fh.write(struct.pack("<B", rec.status))
    man = dict(manifest or {})
    man.setdefault("format_version", FORMAT_VERSION)
    man["record_count"] = len(records)
    man["failed_count"] = sum(1 for r in records if r.status != 0)
    with open(manifest_path(path), "w") as fh:
        json.dump(man, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return man


def read_dataset(path):
    """Read a dataset file (and its manifest, if present)."""
    path = Path(path)
    records = []
    with open(path, "rb") as fh:
        if fh.read(4) != MAGIC:
            raise ValueError(f"{path} is not a dataset container (bad magic)")
        version, count = struct.unpack("<IQ", fh.read(12))
        if version != FORMAT_VERSION:
            raise ValueError(f"unsupported dataset format version {version}")
        for _ in range(count):
            seed, n_rows = struct.unpack("<QI", fh.read(12))
            orientation = np.frombuffer(fh.read(48), dtype="<f8").copy()
            (vf,) = struct.unpack("<d", fh.read(8))
            strain = np.frombuffer(fh.read(n_rows * 48), dtype="<f8")
            strain = strain.reshape(n_rows, 6).copy()
            stress = np.frombuffer(fh.read(n_rows * 48), dtype="<f8")
            stress = stress.reshape(n_rows, 6).copy()
            (status,) = struct.unpack("<B", fh.read(1))
            records.append(SampleRecord(seed=seed, strain=strain,
                                        orientation=orientation, vf=vf,
                                        stress=stress, status=status))
    manifest = {}
    mpath = manifest_path(path)
    if mpath.exists():
        with open(mpath) as fh:
            manifest = json.load(fh)
    return Dataset(records=records, manifest=manifest)


def split_indices(n_records, fractions, seed, indices=None):
    """Disjoint exhaustive random split into train/val/test index arrays.

    Sizes follow the fractions within rounding; an empty test split is
    reassigned one record (taken from validation) with a warning.
    """
    fractions = tuple(float(f) for f in fractions)
    if len(fractions) != 3 or abs(sum(fractions) - 1.0) > 1e-9:
        raise ValueError("need three fractions summing to 1")
    if indices is None:
        indices = np.arange(n_records)
    else:
        indices = np.asarray(indices)
        n_records = len(indices)
    perm = indices[np.random.default_rng(seed).permutation(n_records)]
    n_train = round(n_records * fractions[0])
    n_val = round(n_records * fractions[1])
    n_test = n_records - n_train - n_val
    if n_test < 1 and n_records >= 3:
        warnings.warn("test split empty at this scale; reassigning 1 record")
        n_val -= 1 - n_test
        n_test = 1
    return {
        "train": np.sort(perm[:n_train]).tolist(),
        "val": np.sort(perm[n_train:n_train + n_val]).tolist(),
        "test": np.sort(perm[n_train + n_val:]).tolist(),
    }


def write_series_csv(path, t, eps_plain, sig_plain):
    """Write a stress/strain time series as CSV.

    Header: t, eps11..eps12, sig11..sig12 (plain components).
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    header = ("t,eps11,eps22,eps33,eps23,eps13,eps12,"
              "sig11,sig22,sig33,sig23,sig13,sig12")
    data = np.column_stack([np.asarray(t), np.asarray(eps_plain),
                            np.asarray(sig_plain)])
    np.savetxt(path, data, delimiter=",", header=header, comments="")
    return path
