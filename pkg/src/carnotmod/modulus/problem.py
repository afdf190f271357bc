"""Discretized Fuglede modulus problems."""

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np
from scipy import sparse

from ..errors import DomainError


@dataclass(frozen=True, eq=False)
class ModulusProblem:
    """min Σ_i m_i f_i^p subject to Σ_i μ_{j,i} f_i >= 1 for every measure j, f >= 0.

    Attributes:
        cells: Cell centres, shape (C, d); only used for reporting and witnesses
        masses: Ambient cell masses m_i > 0, shape (C,)
        constraints: Sparse (J, C) matrix, row j holds the cell masses of measure j
        p: Exponent
        label: Free-form description
        meta: Extra data written with the problem (family parameters, ...)

    Example:
        ```python
        problem = ModulusProblem.from_arrays(
            cells=[[0.0], [1.0]], masses=[1.0, 1.0], measures=[[1, 0], [0, 1]], p=2
        )
        solve_modulus(problem).value  # -> 2.0
        ```
    """

    cells: np.ndarray
    masses: np.ndarray
    constraints: sparse.csr_matrix
    p: float
    label: str = ""
    meta: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        masses = np.asarray(self.masses, dtype=float).reshape(-1)
        cells = np.asarray(self.cells, dtype=float)
        if cells.ndim == 1:
            cells = cells.reshape(len(masses), -1)
        constraints = sparse.csr_matrix(self.constraints, dtype=float)
        if len(cells) != len(masses):
            raise DomainError(f"{len(cells)} cells but {len(masses)} masses")
        if constraints.shape[1] != len(masses):
            raise DomainError(
                f"constraint matrix has {constraints.shape[1]} columns for {len(masses)} cells"
            )
        if np.any(masses <= 0) or not np.all(np.isfinite(masses)):
            raise DomainError("cell masses must be positive and finite")
        if constraints.nnz and (
            np.any(constraints.data < 0) or not np.all(np.isfinite(constraints.data))
        ):
            raise DomainError("measure weights must be finite and nonnegative")
        if not self.p > 0 or not np.isfinite(self.p):
            raise DomainError(f"exponent must be positive and finite, got {self.p}")
        constraints.eliminate_zeros()
        object.__setattr__(self, "cells", cells)
        object.__setattr__(self, "masses", masses)
        object.__setattr__(self, "constraints", constraints)
        object.__setattr__(self, "p", float(self.p))

    @classmethod
    def from_arrays(
        cls,
        cells: Any,
        masses: Any,
        measures: Any,
        p: float,
        label: str = "",
    ) -> "ModulusProblem":
        return cls(np.asarray(cells, dtype=float), masses, sparse.csr_matrix(np.asarray(measures, dtype=float)), p, label)

    @property
    def shape(self) -> tuple[int, int]:
        """(number of measures, number of cells)."""
        return self.constraints.shape

    @property
    def row_masses(self) -> np.ndarray:
        return np.asarray(self.constraints.sum(axis=1)).reshape(-1)

    @property
    def empty_rows(self) -> np.ndarray:
        """Indices of measures with zero total mass (no admissible density exists)."""
        return np.flatnonzero(self.row_masses <= 0)

    def with_p(self, p: float) -> "ModulusProblem":
        return ModulusProblem(self.cells, self.masses, self.constraints, p, self.label, dict(self.meta))

    def scaled(self, factor: float) -> "ModulusProblem":
        """Every measure multiplied by ``factor``."""
        if not factor > 0:
            raise DomainError("scale factor must be positive")
        return ModulusProblem(self.cells, self.masses, self.constraints * factor, self.p, self.label, dict(self.meta))

    def subfamily(self, rows: Any) -> "ModulusProblem":
        rows = np.asarray(rows, dtype=int).reshape(-1)
        return ModulusProblem(self.cells, self.masses, self.constraints[rows], self.p, self.label, dict(self.meta))

    def add_measures(self, measures: Any) -> "ModulusProblem":
        """Problem with extra constraint rows appended."""
        extra = sparse.csr_matrix(np.atleast_2d(np.asarray(measures, dtype=float)) if not sparse.issparse(measures) else measures)
        return ModulusProblem(
            self.cells, self.masses, sparse.vstack([self.constraints, extra]).tocsr(), self.p, self.label, dict(self.meta)
        )

    # -------------------------------------------------------------------------
    # Serialization
    # -------------------------------------------------------------------------

    def to_dict(self) -> dict[str, Any]:
        """JSON layout {cells: [[coords..., mass]...], measures: [[weight per cell]...], p}."""
        return {
            "cells": np.column_stack([self.cells, self.masses]).tolist(),
            "measures": self.constraints.toarray().tolist(),
            "p": self.p,
            "label": self.label,
            "meta": self.meta,
        }

    def to_json(self, indent: int | None = None) -> str:
        return json.dumps(self.to_dict(), indent=indent)

    def save(self, path: str | Path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(self.to_json())
        return path

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "ModulusProblem":
        cells = np.asarray(data["cells"], dtype=float)
        if cells.ndim != 2 or cells.shape[1] < 1:
            raise DomainError("cells must be rows of [coords..., mass]")
        measures = np.asarray(data["measures"], dtype=float).reshape(-1, len(cells))
        return cls(
            cells[:, :-1],
            cells[:, -1],
            sparse.csr_matrix(measures),
            float(data["p"]),
            data.get("label", ""),
            dict(data.get("meta", {})),
        )

    @classmethod
    def from_json(cls, text: str) -> "ModulusProblem":
        return cls.from_dict(json.loads(text))

    @classmethod
    def load(cls, path: str | Path) -> "ModulusProblem":
        return cls.from_json(Path(path).read_text())

    def __repr__(self) -> str:
        rows, cols = self.shape
        return f"ModulusProblem({self.label or 'unnamed'}, {rows} measures x {cols} cells, p={self.p:g})"
