# Hardware model: a rows x cols grid of resource-state generators firing a
# 3-qubit GHZ every clock cycle, spatial couplings inside a layer, temporal
# couplings (delay lines) up to tau cycles, and the flattened extended
# layer that serpentines k consecutive layers into one planar lattice.

from __future__ import annotations

import json
from dataclasses import dataclass


class HardwareError(Exception):
    pass


@dataclass(frozen=True)
class Cell:
    t: int  # clock cycle the photons were generated (physical layer index)
    row: int
    col: int


@dataclass(frozen=True)
class HardwareModel:
    rows: int
    cols: int
    delay_limit: int = 3  # tau, in clock cycles
    resource_size: int = 3

    def __post_init__(self):
        if self.rows < 1 or self.cols < 1:
            raise HardwareError("grid must be at least 1x1")
        if self.delay_limit < 1:
            raise HardwareError("delay limit must be >= 1")
        if self.resource_size != 3:
            raise HardwareError("only 3-qubit resource states are modeled")

    def in_grid(self, row: int, col: int) -> bool:
        return 0 <= row < self.rows and 0 <= col < self.cols

    def neighbors(self, c: Cell) -> list[Cell]:
        """Spatial 4-neighborhood in the same layer plus the same generator
        up to tau cycles away (only up to 3 couplings are usable at once,
        enforced at layout time)."""
        if not self.in_grid(c.row, c.col) or c.t < 0:
            raise HardwareError(f"cell {c} outside the model")
        out = []
        for dr, dc in ((-1, 0), (1, 0), (0, -1), (0, 1)):
            r, k = c.row + dr, c.col + dc
            if self.in_grid(r, k):
                out.append(Cell(c.t, r, k))
        for dt in range(1, self.delay_limit + 1):
            if c.t - dt >= 0:
                out.append(Cell(c.t - dt, c.row, c.col))
            out.append(Cell(c.t + dt, c.row, c.col))
        return out

    def to_json(self) -> str:
        return json.dumps(
            {"rows": self.rows, "cols": self.cols, "delay_limit": self.delay_limit,
             "resource_size": self.resource_size},
            sort_keys=True,
        )

    @staticmethod
    def from_json(text: str) -> "HardwareModel":
        doc = json.loads(text)
        return HardwareModel(rows=int(doc["rows"]), cols=int(doc["cols"]),
                             delay_limit=int(doc.get("delay_limit", 3)),
                             resource_size=int(doc.get("resource_size", 3)))


@dataclass(frozen=True)
class ExtendedLayer:
    """k consecutive physical layers flattened to rows x (k*cols).

    Odd-offset layers are horizontally flipped so that the preserved
    boundary delay-line couplings become lattice-adjacent; the flattened
    adjacency is then exactly the grid graph."""

    model: HardwareModel
    t0: int
    span: int

    def __post_init__(self):
        if not 1 <= self.span <= self.model.delay_limit:
            raise HardwareError(
                f"extended layer span {self.span} exceeds delay limit {self.model.delay_limit}"
            )

    @property
    def rows(self) -> int:
        return self.model.rows

    @property
    def cols(self) -> int:
        return self.model.cols * self.span

    def cell_at(self, row: int, fcol: int) -> Cell:
        """Flattened (row, col') -> physical cell."""
        if not (0 <= row < self.rows and 0 <= fcol < self.cols):
            raise HardwareError(f"flattened position ({row}, {fcol}) out of range")
        offset, col = divmod(fcol, self.model.cols)
        if offset % 2 == 1:
            col = self.model.cols - 1 - col
        return Cell(self.t0 + offset, row, col)

    def flat_of(self, cell: Cell) -> tuple[int, int]:
        offset = cell.t - self.t0
        if not 0 <= offset < self.span:
            raise HardwareError(f"cell {cell} outside extended layer")
        col = cell.col if offset % 2 == 0 else self.model.cols - 1 - cell.col
        return cell.row, offset * self.model.cols + col

    def adjacent(self, a: tuple[int, int], b: tuple[int, int]) -> bool:
        """Grid adjacency in flattened coordinates. Cross-boundary pairs are
        the preserved temporal stitches; everything else is spatial."""
        return abs(a[0] - b[0]) + abs(a[1] - b[1]) == 1

    def positions(self):
        for row in range(self.rows):
            for fcol in range(self.cols):
                yield (row, fcol)

    def edge_is_temporal(self, a: tuple[int, int], b: tuple[int, int]) -> bool:
        """True when the flattened edge crosses a layer boundary (a delay-line
        stitch between the same generator in consecutive cycles)."""
        if not self.adjacent(a, b):
            raise HardwareError("not lattice-adjacent")
        return a[0] == b[0] and (min(a[1], b[1]) + 1) % self.model.cols == 0 and a[1] != b[1]


def build_extended_layer(model: HardwareModel, t0: int, k: int) -> ExtendedLayer:
    return ExtendedLayer(model=model, t0=t0, span=k)
