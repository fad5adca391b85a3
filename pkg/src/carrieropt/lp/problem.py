"""Sparse LP/MILP container and row-based assembly helpers."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

LE = "<="
GE = ">="
EQ = "=="

_SENSES = (LE, GE, EQ)


class ProblemError(ValueError):
    """Raised for structurally invalid problems."""


@dataclass
class Row:
    """One linear constraint: sum(coef * x[col]) <sense> rhs."""

    coeffs: list[tuple[int, float]]
    sense: str
    rhs: float
    label: str = ""


@dataclass
class SparseProblem:
    """Minimization problem  min c.x  s.t.  A x {<=,>=,==} b,  l <= x <= u.

    Columns marked in ``integer`` are restricted to integral values and must
    carry finite bounds. Names are kept for diagnostics, warm-start matching
    and the MPS writer; they do not influence the solve.
    """

    a: sp.csr_matrix
    senses: np.ndarray
    rhs: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    objective: np.ndarray
    integer: np.ndarray
    col_names: list[str] = field(default_factory=list)
    row_names: list[str] = field(default_factory=list)

    @property
    def num_rows(self) -> int:
        return self.a.shape[0]

    @property
    def num_cols(self) -> int:
        return self.a.shape[1]

    def validate(self) -> None:
        m, n = self.a.shape
        if len(self.rhs) != m or len(self.senses) != m:
            raise ProblemError("row data length does not match matrix rows")
        if not (len(self.lower) == len(self.upper) == len(self.objective) == len(self.integer) == n):
            raise ProblemError("column data length does not match matrix columns")
        if self.col_names and len(self.col_names) != n:
            raise ProblemError("col_names length mismatch")
        if self.row_names and len(self.row_names) != m:
            raise ProblemError("row_names length mismatch")
        for s in self.senses:
            if s not in _SENSES:
                raise ProblemError(f"unknown row sense {s!r}")
        if np.isnan(self.a.data).any():
            raise ProblemError("constraint matrix contains NaN")
        for name, vec in (("rhs", self.rhs), ("lower", self.lower),
                          ("upper", self.upper), ("objective", self.objective)):
            if np.isnan(vec).any():
                raise ProblemError(f"{name} contains NaN")
        if np.isinf(self.objective).any():
            raise ProblemError("objective contains infinite coefficients")
        if (self.lower > self.upper).any():
            bad = int(np.argmax(self.lower > self.upper))
            raise ProblemError(f"empty bound interval on column {self._col_name(bad)}")
        if self.integer.any():
            marked = np.flatnonzero(self.integer)
            if np.isinf(self.lower[marked]).any() or np.isinf(self.upper[marked]).any():
                raise ProblemError("integer columns require finite bounds")

    def _col_name(self, j: int) -> str:
        return self.col_names[j] if self.col_names else f"x{j}"

    def _row_name(self, i: int) -> str:
        return self.row_names[i] if self.row_names else f"r{i}"

    def column_index(self, name: str) -> int:
        try:
            return self.col_names.index(name)
        except ValueError:
            raise KeyError(f"unknown column name {name!r}") from None

    def copy(self) -> "SparseProblem":
        return SparseProblem(
            a=self.a.copy(),
            senses=self.senses.copy(),
            rhs=self.rhs.copy(),
            lower=self.lower.copy(),
            upper=self.upper.copy(),
            objective=self.objective.copy(),
            integer=self.integer.copy(),
            col_names=list(self.col_names),
            row_names=list(self.row_names),
        )

    @classmethod
    def from_rows(
        cls,
        num_cols: int,
        rows: list[Row],
        lower: np.ndarray,
        upper: np.ndarray,
        objective: np.ndarray,
        integer: np.ndarray | None = None,
        col_names: list[str] | None = None,
    ) -> "SparseProblem":
        data, ri, ci = [], [], []
        senses = np.empty(len(rows), dtype=object)
        rhs = np.empty(len(rows))
        row_names = []
        for i, row in enumerate(rows):
            merged: dict[int, float] = {}
            for col, coef in row.coeffs:
                if col < 0 or col >= num_cols:
                    raise ProblemError(f"row {row.label!r} references column {col} out of range")
                merged[col] = merged.get(col, 0.0) + coef
            for col, coef in sorted(merged.items()):
                if coef != 0.0:
                    ri.append(i)
                    ci.append(col)
                    data.append(coef)
            senses[i] = row.sense
            rhs[i] = row.rhs
            row_names.append(row.label or f"r{i}")
        a = sp.csr_matrix((data, (ri, ci)), shape=(len(rows), num_cols))
        problem = cls(
            a=a,
            senses=senses,
            rhs=rhs,
            lower=np.asarray(lower, dtype=float).copy(),
            upper=np.asarray(upper, dtype=float).copy(),
            objective=np.asarray(objective, dtype=float).copy(),
            integer=(np.zeros(num_cols, dtype=bool) if integer is None
                     else np.asarray(integer, dtype=bool).copy()),
            col_names=list(col_names) if col_names else [],
            row_names=row_names,
        )
        problem.validate()
        return problem
