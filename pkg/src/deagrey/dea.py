"""Radial DEA envelopment models (CCR / BCC), slacks, projections and scale decomposition.

Data follow the column-per-DMU convention: ``inputs`` is ``w x n`` and
``outputs`` is ``q x n``. Each evaluation is a pair of LPs solved by
:func:`deagrey.lp.solve_lp`: a radial stage, then (by default) a slack stage
that maximises the total slack with the radial score held fixed.
"""
from __future__ import annotations

import enum
import warnings
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from deagrey.errors import SolverError, ValidationError
from deagrey.lp import LpProblem, Sense, Status, solve_lp

EFFICIENCY_TOL = 1e-6
RTS_TIE = 1e-7


class Orientation(str, enum.Enum):
    INPUT = "input"
    OUTPUT = "output"


class Rts(str, enum.Enum):
    CRS = "crs"
    VRS = "vrs"


class SlackStage(str, enum.Enum):
    RADIAL_ONLY = "radial"
    TWO_STAGE = "two-stage"


class RtsClass(str, enum.Enum):
    INCREASING = "irs"
    DECREASING = "drs"
    CONSTANT = "-"


class RtsBoundaryWarning(UserWarning):
    """Sum of CRS lambdas sits inside the tie band around 1 for an inefficient DMU."""


def replace_zero_inputs(inputs, factor=1e-6):
    """Replace zeros in each input row by ``factor`` times that row's smallest positive entry.

    Negative entries are left alone so that validation still rejects them.
    """
    X = np.array(inputs, dtype=float)
    for row in X:
        pos = row[row > 0]
        if pos.size and np.any(row == 0):
            row[row == 0] = factor * pos.min()
    return X


@dataclass(frozen=True)
class DeaInstance:
    """Inputs and outputs for ``n`` DMUs.

    Parameters
    ----------
    dmu_names : sequence of str
    inputs : array_like, shape (w, n)
        Strictly positive.
    outputs : array_like, shape (q, n)
        Nonnegative, with at least one positive output per DMU.
    input_units, output_units : sequence of str, optional
    zero_policy : {"reject", "replace"}
        ``"replace"`` applies :func:`replace_zero_inputs` before validation.
    """

    dmu_names: tuple
    inputs: np.ndarray
    outputs: np.ndarray
    input_names: tuple = ()
    output_names: tuple = ()
    input_units: tuple = ()
    output_units: tuple = ()
    provenance: Mapping = field(default_factory=dict, compare=False, repr=False)
    zero_policy: str = "reject"

    def __post_init__(self):
        X = np.array(self.inputs, dtype=float, ndmin=2)
        Y = np.array(self.outputs, dtype=float, ndmin=2)
        names = tuple(str(d) for d in self.dmu_names)
        if self.zero_policy not in ("reject", "replace"):
            raise ValidationError(f"unknown zero_policy {self.zero_policy!r}")
        if X.ndim != 2 or Y.ndim != 2:
            raise ValidationError("inputs and outputs must be 2-D (kinds x DMUs)")
        n = len(names)
        if n < 2:
            raise ValidationError(f"need at least 2 DMUs, got {n}")
        if X.shape[1] != n or Y.shape[1] != n:
            raise ValidationError(
                f"{n} DMU names but inputs have {X.shape[1]} and outputs {Y.shape[1]} columns")
        if X.shape[0] < 1 or Y.shape[0] < 1:
            raise ValidationError("need at least one input and one output kind")
        if not (np.all(np.isfinite(X)) and np.all(np.isfinite(Y))):
            raise ValidationError("inputs and outputs must be finite")
        if self.zero_policy == "replace":
            X = replace_zero_inputs(X)
        bad = np.argwhere(X <= 0)
        if bad.size:
            cells = [(int(i), names[j]) for i, j in bad[:10]]
            raise ValidationError(f"nonpositive inputs at (input row, DMU): {cells}")
        if np.any(Y < 0):
            raise ValidationError("outputs must be nonnegative")
        no_out = [names[j] for j in range(n) if not np.any(Y[:, j] > 0)]
        if no_out:
            raise ValidationError(f"DMUs without a positive output: {no_out}")
        X.setflags(write=False)
        Y.setflags(write=False)
        object.__setattr__(self, "dmu_names", names)
        object.__setattr__(self, "inputs", X)
        object.__setattr__(self, "outputs", Y)
        for attr, rows in (("input_names", X.shape[0]), ("output_names", Y.shape[0])):
            val = tuple(getattr(self, attr)) or tuple(
                f"{attr[0]}{i + 1}" for i in range(rows))
            if len(val) != rows:
                raise ValidationError(f"{attr} has {len(val)} entries, expected {rows}")
            object.__setattr__(self, attr, val)
        object.__setattr__(self, "input_units", tuple(self.input_units))
        object.__setattr__(self, "output_units", tuple(self.output_units))

    @property
    def n(self):
        return len(self.dmu_names)

    @property
    def w(self):
        return self.inputs.shape[0]

    @property
    def q(self):
        return self.outputs.shape[0]

    def with_dmu(self, name, inputs, outputs):
        """Copy of the instance with one more DMU appended."""
        return DeaInstance(
            self.dmu_names + (name,),
            np.column_stack([self.inputs, inputs]),
            np.column_stack([self.outputs, outputs]),
            self.input_names, self.output_names, self.input_units, self.output_units)


@dataclass(frozen=True)
class DeaOptions:
    orientation: Orientation = Orientation.INPUT
    returns_to_scale: Rts = Rts.VRS
    slack_stage: SlackStage = SlackStage.TWO_STAGE

    def __post_init__(self):
        try:
            object.__setattr__(self, "orientation", Orientation(self.orientation))
            object.__setattr__(self, "returns_to_scale", Rts(self.returns_to_scale))
            object.__setattr__(self, "slack_stage", SlackStage(self.slack_stage))
        except ValueError as exc:
            raise ValidationError(str(exc)) from None


@dataclass(frozen=True)
class DeaScore:
    dmu_index: int
    score: float
    lambdas: np.ndarray
    input_slacks: np.ndarray
    output_slacks: np.ndarray
    orientation: Orientation
    returns_to_scale: Rts

    @property
    def sum_lambda(self):
        return float(self.lambdas.sum())

    @property
    def efficient(self):
        """Radial score of 1 with no slack left."""
        return bool(abs(self.score - 1.0) <= EFFICIENCY_TOL
                    and self.input_slacks.max(initial=0.0) <= EFFICIENCY_TOL
                    and self.output_slacks.max(initial=0.0) <= EFFICIENCY_TOL)

    @property
    def efficiency(self):
        """Score on the (0, 1] scale whatever the orientation."""
        return self.score if self.orientation is Orientation.INPUT else 1.0 / self.score


@dataclass(frozen=True)
class EfficiencyDecomposition:
    te: float
    pte: float
    se: float
    rts_class: RtsClass
    boundary: bool = False


@dataclass(frozen=True)
class ProjectionTarget:
    target_inputs: np.ndarray
    target_outputs: np.ndarray


def _check_index(instance, dmu):
    if not 0 <= dmu < instance.n:
        raise ValidationError(f"DMU index {dmu} out of range for {instance.n} DMUs")


def _envelopment(instance, dmu, options, ref, radial=None):
    """Build the envelopment LP over reference columns ``ref``.

    Rows are normalised by their mean so that badly scaled indicators do not
    meet in one tableau; slack variables are reported back in original units.

    With ``radial=None`` the variables are ``[r+, r-, lambda, s-, s+]`` and the
    radial factor ``r = r+ - r-`` is optimised. Otherwise the factor is fixed
    at ``radial`` and the variables are ``[lambda, s-, s+]`` with the raw-unit
    slack total maximised.
    """
    X = instance.inputs
    Y = instance.outputs
    xs = X.mean(axis=1)
    ys = Y.mean(axis=1)
    ys = np.where(ys > 0, ys, 1.0)
    Xn = X[:, ref] / xs[:, None]
    Yn = Y[:, ref] / ys[:, None]
    x0 = X[:, dmu] / xs
    y0 = Y[:, dmu] / ys
    w, q, k = X.shape[0], Y.shape[0], len(ref)
    vrs = options.returns_to_scale is Rts.VRS
    inp = options.orientation is Orientation.INPUT

    lead = 2 if radial is None else 0
    nv = lead + k + w + q
    m = w + q + (1 if vrs else 0)
    A = np.zeros((m, nv))
    b = np.zeros(m)
    lam = slice(lead, lead + k)
    A[:w, lam] = Xn
    A[:w, lead + k:lead + k + w] = np.eye(w)
    A[w:w + q, lam] = Yn
    A[w:w + q, lead + k + w:] = -np.eye(q)
    if radial is None:
        if inp:
            A[:w, 0], A[:w, 1] = -x0, x0
            b[w:w + q] = y0
        else:
            A[w:w + q, 0], A[w:w + q, 1] = -y0, y0
            b[:w] = x0
    elif inp:
        b[:w] = radial * x0
        b[w:w + q] = y0
    else:
        b[:w] = x0
        b[w:w + q] = radial * y0
    if vrs:
        A[-1, lam] = 1.0
        b[-1] = 1.0

    cost = np.zeros(nv)
    if radial is None:
        cost[0], cost[1] = 1.0, -1.0
        sense = Sense.MINIMIZE if inp else Sense.MAXIMIZE
    else:
        cost[k:k + w] = xs
        cost[k + w:] = ys
        sense = Sense.MAXIMIZE
    return LpProblem(cost, A, b, sense), xs, ys


def _solve_or_raise(problem, stage, instance, dmu, options):
    sol = solve_lp(problem)
    if sol.status is not Status.OPTIMAL:
        raise SolverError(
            f"{stage} LP for DMU {instance.dmu_names[dmu]!r} is {sol.status.value}",
            {"dmu": instance.dmu_names[dmu], "stage": stage,
             "orientation": options.orientation.value,
             "rts": options.returns_to_scale.value,
             "status": sol.status.value, "iterations": sol.iterations})
    return sol


def evaluate_dmu(instance: DeaInstance, dmu: int, options: DeaOptions = DeaOptions(),
                 reference: Sequence[int] | None = None) -> DeaScore:
    """Score one DMU against the frontier spanned by ``reference`` (all DMUs by default).

    Returns theta (input orientation, ``0 < theta <= 1``) or eta (output
    orientation, ``eta >= 1``) with intensity weights laid out over all ``n``
    DMUs; weights of DMUs outside ``reference`` are zero.
    """
    _check_index(instance, dmu)
    ref = list(range(instance.n)) if reference is None else sorted(set(reference))
    if not ref:
        raise ValidationError("reference set is empty")
    for j in ref:
        _check_index(instance, j)
    w, q, k = instance.w, instance.q, len(ref)

    problem, xs, ys = _envelopment(instance, dmu, options, ref)
    sol = _solve_or_raise(problem, "radial", instance, dmu, options)
    score = float(sol.solution[0] - sol.solution[1])
    lam_k = sol.solution[2:2 + k]
    s_in = sol.solution[2 + k:2 + k + w] * xs
    s_out = sol.solution[2 + k + w:] * ys

    if options.slack_stage is SlackStage.TWO_STAGE:
        problem2, _, _ = _envelopment(instance, dmu, options, ref, radial=score)
        sol2 = _solve_or_raise(problem2, "slack", instance, dmu, options)
        lam_k = sol2.solution[:k]
        s_in = sol2.solution[k:k + w] * xs
        s_out = sol2.solution[k + w:] * ys

    lambdas = np.zeros(instance.n)
    lambdas[ref] = lam_k
    return DeaScore(dmu, score, lambdas, s_in, s_out,
                    options.orientation, options.returns_to_scale)


def evaluate_all(instance: DeaInstance, options: DeaOptions = DeaOptions()) -> list:
    return [evaluate_dmu(instance, k, options) for k in range(instance.n)]


def _classify(score):
    if score.returns_to_scale is not Rts.CRS:
        raise ValidationError("returns-to-scale classification needs a CRS score")
    if score.efficient:
        return RtsClass.CONSTANT, False
    total = score.sum_lambda
    if total < 1.0 - RTS_TIE:
        return RtsClass.INCREASING, False
    if total > 1.0 + RTS_TIE:
        return RtsClass.DECREASING, False
    return RtsClass.CONSTANT, True


def classify_rts(crs_score: DeaScore) -> RtsClass:
    """Returns to scale from the CRS intensity sum.

    An inefficient DMU whose lambda sum lies within ``1 +/- 1e-7`` is
    reported as constant and an :class:`RtsBoundaryWarning` is issued.
    """
    cls, boundary = _classify(crs_score)
    if boundary:
        warnings.warn(
            f"DMU {crs_score.dmu_index}: sum(lambda)={crs_score.sum_lambda!r} is on the "
            "returns-to-scale tie band", RtsBoundaryWarning, stacklevel=2)
    return cls


def decompose(instance: DeaInstance, dmu: int,
              orientation: Orientation = Orientation.INPUT,
              slack_stage: SlackStage = SlackStage.TWO_STAGE,
              crs_score: DeaScore | None = None,
              vrs_score: DeaScore | None = None) -> EfficiencyDecomposition:
    """Split technical efficiency into pure technical and scale efficiency.

    Pre-computed CRS/VRS scores may be passed in to avoid re-solving.
    """
    if crs_score is None:
        crs_score = evaluate_dmu(instance, dmu, DeaOptions(orientation, Rts.CRS, slack_stage))
    if vrs_score is None:
        vrs_score = evaluate_dmu(instance, dmu, DeaOptions(orientation, Rts.VRS, slack_stage))
    te = crs_score.efficiency
    pte = vrs_score.efficiency
    cls, boundary = _classify(crs_score)
    return EfficiencyDecomposition(te, pte, te / pte, cls, boundary)


def project(instance: DeaInstance, score: DeaScore) -> ProjectionTarget:
    """Frontier targets: radially scaled data corrected by the slacks."""
    _check_index(instance, score.dmu_index)
    if score.lambdas.size != instance.n:
        raise ValidationError("score does not belong to this instance")
    x0 = instance.inputs[:, score.dmu_index]
    y0 = instance.outputs[:, score.dmu_index]
    if score.orientation is Orientation.INPUT:
        tx = score.score * x0 - score.input_slacks
        ty = y0 + score.output_slacks
    else:
        tx = x0 - score.input_slacks
        ty = score.score * y0 + score.output_slacks
    return ProjectionTarget(tx, ty)
