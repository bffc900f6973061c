"""Sparse assembly, displacement control and the implicit breaking loop.

Load stepping is displacement-driven: each step moves the prescribed dofs by
their per-step increment, equilibrium is found by Newton iterations with an
energy-based convergence test, and only then are bonds allowed to fail. The
eligible bonds are ranked by how far past their critical stretch they are;
at most a small batch breaks at a time and equilibrium is re-established
before the next batch, which keeps the quasi-static path stable. A step is
finished when no bond is eligible.

Everything is deterministic: bonds are ordered, ties in the ranking fall
back to the bond index, and assembly accumulates in a fixed order, so a
rerun of the same inputs reproduces the history bit for bit.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components
from scipy.sparse.linalg import splu

from . import damage as damage_mod
from . import mechanics
from .errors import ConfigError, NonConvergenceError, SingularSystemError
from .model import Model

log = logging.getLogger(__name__)

DOF_NAMES = {"ux": 0, "uy": 1, "rot": 2}


@dataclass(frozen=True)
class BoundaryRule:
    """Prescribed displacement: one dof of one group, linear in the step."""

    group: str
    dof: str
    increment: float

    def __post_init__(self):
        if self.dof not in DOF_NAMES:
            raise ConfigError(f"unknown dof {self.dof!r}; use one of {sorted(DOF_NAMES)}")


@dataclass(frozen=True)
class PointLoadRule:
    """External force ramp, split evenly over the group's points."""

    group: str
    dof: str
    increment: float

    def __post_init__(self):
        if self.dof not in DOF_NAMES:
            raise ConfigError(f"unknown dof {self.dof!r}; use one of {sorted(DOF_NAMES)}")


@dataclass
class LoadProgram:
    steps: int
    boundaries: list[BoundaryRule]
    loads: list[PointLoadRule] = field(default_factory=list)
    batch_size: int = 10
    energy_tolerance: float = 1e-4
    max_newton_iterations: int = 50
    max_break_rounds: int = 10_000
    monitor_group: str | None = None
    monitor_dof: str | None = None

    def __post_init__(self):
        if self.steps < 1:
            raise ConfigError(f"program.steps must be >= 1, got {self.steps}")
        if self.batch_size < 1:
            raise ConfigError(f"program.batch_size must be >= 1, got {self.batch_size}")
        if self.energy_tolerance <= 0.0:
            raise ConfigError(
                f"program.energy_tolerance must be positive, got {self.energy_tolerance}"
            )
        if not self.boundaries and not self.loads:
            raise ConfigError("program needs at least one boundary or load rule")


@dataclass
class StepRecord:
    step: int
    prescribed: float
    reaction: float
    broken_total: int
    energy: float
    newton_iterations: int
    break_rounds: int


@dataclass
class RunHistory:
    records: list[StepRecord] = field(default_factory=list)
    damage: list[np.ndarray] = field(default_factory=list)

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.records])

    @property
    def peak_reaction(self) -> float:
        if not self.records:
            return 0.0
        return float(np.abs(self.column("reaction")).max())


def dof_indices(points: np.ndarray, dof: str) -> np.ndarray:
    return 3 * np.asarray(points, dtype=np.int64) + DOF_NAMES[dof]


def assemble(model: Model, broken: np.ndarray | None = None, blocks: np.ndarray | None = None):
    """Global sparse stiffness from all unbroken bonds."""
    b = model.bonds
    if broken is None:
        broken = b.broken
    if blocks is None:
        blocks = mechanics.stiffness_blocks(model.xy, b, model.k_n, model.k_t, model.k_th, model.volume)
    dofs = np.empty((len(b), 6), dtype=np.int64)
    for c in range(3):
        dofs[:, c] = 3 * b.i + c
        dofs[:, 3 + c] = 3 * b.j + c
    mask = ~broken
    rows = np.broadcast_to(dofs[mask, :, None], (mask.sum(), 6, 6)).ravel()
    cols = np.broadcast_to(dofs[mask, None, :], (mask.sum(), 6, 6)).ravel()
    n = model.n_dofs
    k = sp.coo_matrix((blocks[mask].ravel(), (rows, cols)), shape=(n, n)).tocsr()
    k.sum_duplicates()
    return k


def reduced_rhs(k, f_ext, u, free):
    """Right-hand side of the reduced linear problem at the current state.

    ``u`` already carries the prescribed values on the fixed dofs, so the
    residual restricted to the free dofs is the whole story.
    """
    return (f_ext - k @ u)[free]


def break_ranked(margins: np.ndarray, unbroken: np.ndarray, batch_size: int) -> np.ndarray:
    """Indices of the bonds to break this round, largest margin first.

    Eligible bonds have margin >= 0; ties are ordered by bond index so the
    selection is reproducible. Returns an empty array when nothing is
    eligible.
    """
    candidates = np.flatnonzero(unbroken & (margins >= 0.0))
    if len(candidates) == 0:
        return candidates
    order = np.lexsort((candidates, -margins[candidates]))
    return candidates[order[: min(batch_size, len(candidates))]]


class QuasiStatic:
    """Stateful driver for one load program on one prepared model."""

    def __init__(self, model: Model, program: LoadProgram):
        if model.bonds.s0 is None:
            raise ConfigError("model has no critical stretches; build it with damage enabled")
        self.model = model
        self.program = program
        self.u = np.zeros(model.n_dofs)
        self.f_ext = np.zeros(model.n_dofs)
        self.history = RunHistory()
        self.blocks = mechanics.stiffness_blocks(
            model.xy, model.bonds, model.k_n, model.k_t, model.k_th, model.volume
        )
        self._resolve_rules()
        self._auto_fixed = np.zeros(model.n_dofs, dtype=bool)
        self._e_scale = 0.0
        self._refactor()

    # -- setup -------------------------------------------------------------

    def _resolve_rules(self):
        incr: dict[int, float] = {}
        for rule in self.program.boundaries:
            for d in dof_indices(self.model.group(rule.group), rule.dof):
                d = int(d)
                if d in incr and incr[d] != rule.increment:
                    raise ConfigError(
                        f"dof {d} prescribed twice with different increments "
                        f"({incr[d]} vs {rule.increment})"
                    )
                incr[d] = rule.increment
        self.fixed_dofs = np.array(sorted(incr), dtype=np.int64)
        self.fixed_incr = np.array([incr[d] for d in self.fixed_dofs])

        self.load_dofs = np.empty(0, dtype=np.int64)
        self.load_incr = np.empty(0)
        if self.program.loads:
            dd, vv = [], []
            for rule in self.program.loads:
                pts = self.model.group(rule.group)
                if len(pts) == 0:
                    raise ConfigError(f"load group {rule.group!r} is empty")
                dd.append(dof_indices(pts, rule.dof))
                vv.append(np.full(len(pts), rule.increment / len(pts)))
            self.load_dofs = np.concatenate(dd)
            self.load_incr = np.concatenate(vv)

        monitor_group = self.program.monitor_group
        monitor_dof = self.program.monitor_dof
        if monitor_group is None:
            driving = [r for r in self.program.boundaries if r.increment != 0.0]
            rule = (driving or self.program.boundaries or [None])[0]
            if rule is not None:
                monitor_group, monitor_dof = rule.group, rule.dof
        self.monitor_dofs = (
            dof_indices(self.model.group(monitor_group), monitor_dof)
            if monitor_group is not None
            else np.empty(0, dtype=np.int64)
        )
        self.monitor_incr = 0.0
        for rule in self.program.boundaries:
            if rule.group == monitor_group and rule.dof == monitor_dof:
                self.monitor_incr = rule.increment

    # -- linear algebra ----------------------------------------------------

    def _refactor(self):
        self.k = assemble(self.model, blocks=self.blocks)
        diag = self.k.diagonal()
        user_fixed = np.zeros(self.model.n_dofs, dtype=bool)
        user_fixed[self.fixed_dofs] = True
        auto = (diag == 0.0) & ~user_fixed
        newly = auto & ~self._auto_fixed
        if np.any(newly):
            pts = np.unique(np.flatnonzero(newly) // 3)
            log.warning(
                "%d dof(s) at %d point(s) carry no stiffness and are held fixed "
                "(points %s)",
                int(newly.sum()),
                len(pts),
                pts.tolist()[:8],
            )
        self._auto_fixed = auto
        self.free = np.flatnonzero(~(user_fixed | auto))
        self._check_floating_components()
        self.k_ff = self.k[self.free][:, self.free].tocsc()
        if len(self.free) == 0:
            self.lu = None
            return
        try:
            # symmetric-mode SuperLU roughly halves the fill on these matrices
            self.lu = splu(
                self.k_ff,
                permc_spec="COLAMD",
                options={"SymmetricMode": True, "DiagPivotThresh": 1e-3},
            )
        except RuntimeError as exc:
            raise SingularSystemError(
                f"stiffness factorization failed ({exc})", history=self.history
            ) from None
        pivots = np.abs(self.lu.U.diagonal())
        if pivots.min() <= 1e-12 * pivots.max():
            raise SingularSystemError(
                f"numerically singular stiffness (pivot ratio {pivots.min() / pivots.max():.2e}); "
                "a region is insufficiently constrained",
                history=self.history,
            )

    def _check_floating_components(self):
        """A connected chunk with free dofs but no prescribed dof cannot be solved."""
        b = self.model.bonds
        alive = ~b.broken
        n = self.model.n_points
        adj = sp.coo_matrix(
            (np.ones(int(alive.sum())), (b.i[alive], b.j[alive])), shape=(n, n)
        )
        n_comp, labels = connected_components(adj, directed=False)
        has_free = np.zeros(n_comp, dtype=bool)
        free_pts = np.unique(self.free // 3)
        has_free[np.unique(labels[free_pts])] = True
        user_pts = np.unique(self.fixed_dofs // 3) if len(self.fixed_dofs) else []
        anchored = np.zeros(n_comp, dtype=bool)
        anchored[np.unique(labels[user_pts])] = True
        floating = np.flatnonzero(has_free & ~anchored)
        if len(floating):
            comp = int(floating[0])
            size = int((labels == comp).sum())
            raise SingularSystemError(
                f"{len(floating)} free-floating component(s) with no prescribed dof; "
                f"component {comp} has {size} point(s)",
                history=self.history,
            )

    def _solve_free(self, rhs: np.ndarray) -> np.ndarray:
        if self.lu is None:
            return np.zeros(0)
        ddu = self.lu.solve(rhs)
        if not np.isfinite(ddu).all():
            raise SingularSystemError(
                "non-finite displacement increment from the linear solve",
                history=self.history,
            )
        return ddu

    def _energy(self) -> float:
        m = self.model
        return mechanics.total_energy(self.u, m.xy, m.bonds, m.k_n, m.k_t, m.k_th, m.volume)

    def reactions(self) -> np.ndarray:
        return self.k @ self.u - self.f_ext

    # -- stepping ----------------------------------------------------------

    def _newton(self, targets: np.ndarray) -> int:
        eps = self.program.energy_tolerance
        self.u[self.fixed_dofs] = targets
        e_prev = self._energy()
        trace = [e_prev]
        for it in range(1, self.program.max_newton_iterations + 1):
            rhs = reduced_rhs(self.k, self.f_ext, self.u, self.free)
            self.u[self.free] += self._solve_free(rhs)
            e = self._energy()
            trace.append(e)
            self._e_scale = max(self._e_scale, abs(e))
            if e == e_prev:
                # covers the fully unloaded state where both energies are zero
                return it
            # relative energy change; the floor keeps the test meaningful when
            # the model has fully unloaded and the energy is roundoff noise
            if abs(e - e_prev) < eps * max(abs(e), 1e-12 * self._e_scale):
                return it
            e_prev = e
        tail = ", ".join(f"{v:.6e}" for v in trace[-6:])
        raise NonConvergenceError(
            f"Newton iteration did not converge within "
            f"{self.program.max_newton_iterations} iterations (energy trace ... {tail})",
            history=self.history,
        )

    def _margins(self) -> np.ndarray:
        m = self.model
        s, _, _ = mechanics.deformations_all(self.u, m.xy, m.bonds)
        return damage_mod.breakage_margins(s, m.bonds.s0)

    def step(self, step_index: int) -> StepRecord:
        targets = self.fixed_incr * step_index
        if len(self.load_dofs):
            self.f_ext[:] = 0.0
            np.add.at(self.f_ext, self.load_dofs, self.load_incr * step_index)
        newton_total = 0
        rounds = 0
        while True:
            newton_total += self._newton(targets)
            to_break = break_ranked(
                self._margins(), ~self.model.bonds.broken, self.program.batch_size
            )
            if len(to_break) == 0:
                break
            if rounds >= self.program.max_break_rounds:
                raise NonConvergenceError(
                    f"step {step_index}: breaking did not settle within "
                    f"{self.program.max_break_rounds} rounds",
                    history=self.history,
                )
            self.model.bonds.broken[to_break] = True
            rounds += 1
            self._refactor()

        record = StepRecord(
            step=step_index,
            prescribed=self.monitor_incr * step_index,
            reaction=float(self.reactions()[self.monitor_dofs].sum()),
            broken_total=int(self.model.bonds.broken.sum()),
            energy=self._energy(),
            newton_iterations=newton_total,
            break_rounds=rounds,
        )
        return record

    def run(self, record_damage: bool = False, on_step=None) -> RunHistory:
        for step_index in range(1, self.program.steps + 1):
            record = self.step(step_index)
            self.history.records.append(record)
            if record_damage:
                self.history.damage.append(
                    damage_mod.point_damage(self.model.bonds, self.model.n_points)
                )
            if on_step is not None:
                on_step(self, record)
            log.info(
                "step %d: prescribed %.4e, reaction %.6e, broken %d, energy %.6e",
                record.step,
                record.prescribed,
                record.reaction,
                record.broken_total,
                record.energy,
            )
        return self.history


def run(model: Model, program: LoadProgram, record_damage: bool = False, on_step=None) -> RunHistory:
    """Execute the whole load program; history survives on solver errors."""
    return QuasiStatic(model, program).run(record_damage=record_damage, on_step=on_step)
