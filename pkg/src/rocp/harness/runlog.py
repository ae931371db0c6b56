from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

COLUMNS = ("step", "return_mean", "return_min", "return_max", "q1_mean", "q2_mean",
           "pearson_r", "critic_loss", "actor_obj", "alpha", "wall_clock_s")


def _fmt(v) -> str:
    if isinstance(v, int):
        return str(v)
    v = float(v)
    return "nan" if math.isnan(v) else repr(v)


@dataclass
class RunLog:
    rows: list[dict] = field(default_factory=list)
    updates: int = 0
    aborted: str | None = None
    final_eval: list = field(default_factory=list)  # EpisodeRecords of the last evaluation
    agent: object = field(default=None, repr=False, compare=False)

    def append(self, **row) -> None:
        missing = set(COLUMNS) - set(row)
        if missing:
            raise KeyError(f"row lacks {sorted(missing)}")
        if self.rows and row["step"] <= self.rows[-1]["step"]:
            raise ValueError("log rows must be monotone in step")
        self.rows.append({k: row[k] for k in COLUMNS})

    def __len__(self):
        return len(self.rows)

    def column(self, name: str) -> list:
        return [r[name] for r in self.rows]

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as f:
            w = csv.writer(f, lineterminator="\n")
            w.writerow(COLUMNS)
            for r in self.rows:
                w.writerow([_fmt(r[k]) for k in COLUMNS])

    @classmethod
    def read_csv(cls, path) -> "RunLog":
        log = cls()
        with open(path, newline="") as f:
            reader = csv.reader(f)
            header = next(reader)
            if tuple(header) != COLUMNS:
                raise ValueError(f"unexpected header {header}")
            for rec in reader:
                row = {k: float(v) for k, v in zip(COLUMNS, rec)}
                row["step"] = int(row["step"])
                log.rows.append(row)
        return log
