"""Binary snapshots and CSV tables.

Snapshot layout: the 8-byte magic ``HLSNAP01``, a little-endian uint64 header
length, a UTF-8 JSON header, then each field as raw little-endian float64
values in row (x-major) order, in the order listed by the header.
"""
import csv
import json
import math
import struct

import numpy as np

from .grid import GridSpec

MAGIC = b"HLSNAP01"

CSV_COLUMNS = ["t", "h_s_gamma", "h_s_gamma_g", "u_minus_U", "sigma_floor", "I_sup",
               "energy_rate", "F", "apriori_bound", "envelope_upper", "envelope_lower",
               "G", "W", "boundary_resid_1", "boundary_resid_3", "stop_reason",
               "C_energy", "C_envelope"]


def write_snapshot(path, state, params):
    fields = {"w": state.w, "u": state.u, "v": state.v}
    if state.b is not None:
        fields["b"] = state.b
    header = {"t": state.t, "grid": state.grid.to_dict(), "params": params.to_dict(),
              "fields": list(fields), "shape": list(state.grid.shape), "byte_order": "little",
              "layout": "row x-major", "scalar": "float64"}
    blob = json.dumps(header, sort_keys=True).encode()
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<Q", len(blob)))
        fh.write(blob)
        for arr in fields.values():
            fh.write(np.ascontiguousarray(arr, dtype="<f8").tobytes())


def read_snapshot(path):
    """Return (header, {name: array}) exactly as written."""
    with open(path, "rb") as fh:
        data = fh.read()
    if data[:8] != MAGIC:
        raise ValueError(f"{path}: not a snapshot file")
    (n,) = struct.unpack("<Q", data[8:16])
    header = json.loads(data[16:16 + n])
    shape = tuple(header["shape"])
    size = shape[0] * shape[1] * 8
    offset = 16 + n
    fields = {}
    for name in header["fields"]:
        chunk = data[offset:offset + size]
        if len(chunk) != size:
            raise ValueError(f"{path}: truncated payload for {name}")
        fields[name] = np.frombuffer(chunk, dtype="<f8").reshape(shape).astype(float)
        offset += size
    return header, fields


def snapshot_grid(header):
    g = header["grid"]
    return GridSpec(nx=g["nx"], ny=g["ny"], y_max=g["y_max"], x_length=g["x_length"])


def fmt(value):
    """Shortest round-trip text for floats; empty for missing values."""
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if math.isnan(value):
            return "nan"
        return repr(value)
    return str(value)


def record_row(record, stop_reason="", C_energy=None, C_envelope=None):
    n = record.norms
    values = [record.t, n.h_s_gamma, n.h_s_gamma_g, n.u_minus_U, n.sigma_floor, n.I_sup,
              record.energy_rate, record.F_value, record.apriori_bound, record.envelope_upper,
              record.envelope_lower, record.G, record.W, record.boundary_resid_1,
              record.boundary_resid_3, stop_reason, C_energy, C_envelope]
    return [fmt(v) for v in values]


def write_table(path, columns, rows):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([fmt(v) for v in row])


def read_table(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))
