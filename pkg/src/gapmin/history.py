"""Convergence history CSV: the pinned schema and a streaming writer.

The 8-column header below is a stable external interface; downstream tooling
parses these files by name. Floats are written with repr() so values survive
a parse round trip bit-exactly.
"""

from __future__ import annotations

import os
from typing import Optional

from .algorithms import ConvergenceRecord

CSV_HEADER = "algo,iter,elapsed_s,gap_beta0,gap_betak,step_norm,restarted,epoch"

REPORT_HEADER = "algo,iter,elapsed_s,gap_report"

FLUSH_EVERY = 100


def format_row(algo: str, rec: ConvergenceRecord) -> str:
    return (f"{algo},{rec.iter},{rec.elapsed_s!r},{rec.gap_beta0!r},"
            f"{rec.gap_betak!r},{rec.step_norm!r},{int(rec.restarted)},{rec.epoch}")


def format_report_row(algo: str, rec: ConvergenceRecord) -> str:
    return f"{algo},{rec.iter},{rec.elapsed_s!r},{rec.gap_report!r}"


class HistoryWriter:
    """Observer that appends one CSV row per record, flushing periodically.

    Usable directly as a runner observer (it never requests a stop). Close it
    (or use it as a context manager) to flush the tail.
    """

    def __init__(self, path: str, algo: str, flush_every: int = FLUSH_EVERY):
        self.path = path
        self.algo = algo
        self.flush_every = flush_every
        parent = os.path.dirname(os.path.abspath(path))
        os.makedirs(parent, exist_ok=True)
        self._fh = open(path, "w", encoding="utf-8")
        self._fh.write(CSV_HEADER + "\n")
        self._pending = 0

    def __call__(self, record: ConvergenceRecord) -> Optional[bool]:
        self._fh.write(format_row(self.algo, record) + "\n")
        self._pending += 1
        if self._pending >= self.flush_every:
            self._fh.flush()
            self._pending = 0
        return None

    def close(self) -> None:
        if not self._fh.closed:
            self._fh.flush()
            self._fh.close()

    def __enter__(self) -> "HistoryWriter":
        return self

    def __exit__(self, *exc) -> None:
        self.close()


def write_history(path: str, algo: str, records) -> None:
    """Write a complete record list as one history CSV."""
    with HistoryWriter(path, algo) as writer:
        for rec in records:
            writer(rec)


def write_merged(path: str, runs: dict) -> None:
    """Concatenate {algo: records} into one CSV under the same header."""
    parent = os.path.dirname(os.path.abspath(path))
    os.makedirs(parent, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(CSV_HEADER + "\n")
        for algo, records in runs.items():
            for rec in records:
                fh.write(format_row(algo, rec) + "\n")


def write_report(path: str, runs: dict) -> None:
    """Write the shared-reporting-gap CSV for records that carry one."""
    parent = os.path.dirname(os.path.abspath(path))
    os.makedirs(parent, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(REPORT_HEADER + "\n")
        for algo, records in runs.items():
            for rec in records:
                if rec.gap_report is not None:
                    fh.write(format_report_row(algo, rec) + "\n")


def read_history(path: str) -> dict:
    """Parse a history CSV back into {column: list} with typed columns.

    Accepts both the 8-column history header and the report header.
    """
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().strip()
        if header not in (CSV_HEADER, REPORT_HEADER):
            raise ValueError(f"unexpected history header {header!r}")
        names = header.split(",")
        out: dict = {name: [] for name in names}
        converters = {"iter": int, "restarted": lambda s: bool(int(s)),
                      "epoch": int, "algo": str}
        for lineno, line in enumerate(fh, start=2):
            line = line.strip()
            if not line:
                continue
            parts = line.split(",")
            if len(parts) != len(names):
                raise ValueError(f"line {lineno}: expected {len(names)} fields")
            for name, part in zip(names, parts):
                out[name].append(converters.get(name, float)(part))
    return out
