"""Interpretable logic network built from smooth clamped-sum gates.

The network alternates three kinds of structure: an exhaustive pairing
layer that lines up every pair of its inputs (plus each input against the
constants true and false), a gate layer holding one trainable compensation
level per pairing, and a sparse linear selector that routes gate outputs
forward.  Values live on the signed interval [-1, 1] between layers and
are mapped to [0, 1] around each gate evaluation; a tanh remap sits
between consecutive logic parts and the final layer reads the selector
output as a class decision.

Only the compensation levels and selector weights train; the pairing
structure is fixed, so every learned parameter has a direct logical
reading.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .operators import SquashParams, squash, squash_grad

__all__ = [
    "ConfigurationError",
    "ShapeMismatchError",
    "StaleCacheError",
    "Pairing",
    "PairingTable",
    "enumerate_pairings",
    "NetworkConfig",
    "LayerSpec",
    "ForwardCache",
    "Gradients",
    "LogicNetwork",
    "build_network",
    "fit_normalization",
]

FORMAT_NAME = "softlogic-model"
FORMAT_VERSION = 1


class ConfigurationError(ValueError):
    """Raised for structurally impossible network configurations."""


class ShapeMismatchError(ValueError):
    """Raised when data shape does not match the network's feature count."""


class StaleCacheError(RuntimeError):
    """Raised when a backward pass uses a cache from outdated parameters."""


@dataclass(frozen=True)
class Pairing:
    """One slot of a pairing layer.

    kind "pair" couples inputs i and j, "true" couples input i with the
    constant +1 and "false" with the constant -1.
    """

    kind: str
    i: int
    j: int | None = None

    def __post_init__(self) -> None:
        if self.kind not in ("pair", "true", "false"):
            raise ValueError(f"unknown pairing kind {self.kind!r}")
        if self.kind == "pair" and (self.j is None or not self.i < self.j):
            raise ValueError("pair requires i < j")
        if self.kind != "pair" and self.j is not None:
            raise ValueError("constant pairings take a single index")

    def to_json(self) -> list:
        if self.kind == "pair":
            return ["pair", self.i, self.j]
        return [self.kind, self.i]

    @staticmethod
    def from_json(item: list) -> "Pairing":
        if item[0] == "pair":
            return Pairing("pair", int(item[1]), int(item[2]))
        return Pairing(item[0], int(item[1]))


def enumerate_pairings(width: int) -> list[Pairing]:
    """Deterministic pairing order: all (i, j) with i < j lexicographically,
    then every input against true, then every input against false."""
    if width < 1:
        raise ConfigurationError("pairing layer needs at least one input")
    out = [Pairing("pair", i, j) for i in range(width) for j in range(i + 1, width)]
    out += [Pairing("true", i) for i in range(width)]
    out += [Pairing("false", i) for i in range(width)]
    return out


class PairingTable:
    """Pairing list plus precomputed gather indices and scatter matrices."""

    def __init__(self, width_in: int, pairings: list[Pairing]):
        self.width_in = width_in
        self.pairings = pairings
        self.width_out = len(pairings)
        left = np.zeros(self.width_out, dtype=np.intp)
        right = np.zeros(self.width_out, dtype=np.intp)
        const = np.zeros(self.width_out)
        is_pair = np.zeros(self.width_out, dtype=bool)
        for s, p in enumerate(pairings):
            left[s] = p.i
            if p.kind == "pair":
                right[s] = p.j
                is_pair[s] = True
            else:
                const[s] = 1.0 if p.kind == "true" else -1.0
        self.left_idx = left
        self.right_idx = right
        self.const_vals = const
        self.is_pair = is_pair
        # Dense 0/1 scatter maps turn backward accumulation into matmuls.
        scatter_l = np.zeros((self.width_out, width_in))
        scatter_r = np.zeros((self.width_out, width_in))
        scatter_l[np.arange(self.width_out), left] = 1.0
        scatter_r[is_pair, right[is_pair]] = 1.0
        self.scatter_left = scatter_l
        self.scatter_right = scatter_r

    @classmethod
    def standard(cls, width_in: int) -> "PairingTable":
        return cls(width_in, enumerate_pairings(width_in))

    def operands(self, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Gather signed left/right operand matrices for a batch."""
        left = x[:, self.left_idx]
        right = np.where(self.is_pair, x[:, self.right_idx], self.const_vals)
        return left, right

    def scatter(self, g_left: np.ndarray, g_right: np.ndarray) -> np.ndarray:
        """Accumulate operand gradients back onto the layer's inputs."""
        return g_left @ self.scatter_left + g_right @ self.scatter_right


@dataclass(frozen=True)
class NetworkConfig:
    """Structural and initialization choices for :func:`build_network`."""

    hidden_width: int = 8
    logic_parts: int = 2
    squash: SquashParams = field(default_factory=SquashParams)
    alpha_init: tuple[float, float] = (0.25, 0.75)
    max_pairing_slots: int = 10_000
    seed: int = 0

    def __post_init__(self) -> None:
        if self.hidden_width < 2:
            raise ConfigurationError("hidden_width must be at least 2")
        if self.logic_parts < 1:
            raise ConfigurationError("logic_parts must be at least 1")
        lo, hi = self.alpha_init
        if not (0.0 <= lo <= hi <= 1.0):
            raise ConfigurationError("alpha_init must be an ordered range in [0, 1]")
        if self.max_pairing_slots < 1:
            raise ConfigurationError("max_pairing_slots must be positive")


@dataclass(frozen=True)
class LayerSpec:
    kind: str
    width_in: int
    width_out: int


@dataclass
class ForwardCache:
    """Activations recorded by forward for use in backward."""

    version: int
    normalized: np.ndarray
    gate_pre: list[np.ndarray]      # unit-domain gate arguments per part
    gate_out: list[np.ndarray]      # signed gate outputs per part
    sel_pre: list[np.ndarray]       # selector outputs before clamping
    sel_out: list[np.ndarray]       # clamped selector outputs
    tanh_out: list[np.ndarray]      # remapped values between parts
    outputs: np.ndarray


@dataclass
class Gradients:
    """Loss gradients for every trainable parameter group."""

    alphas: list[np.ndarray]
    selectors: list[np.ndarray]


def fit_normalization(features: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Per-feature (low, high) bounds for the affine map onto [-1, 1]."""
    arr = np.asarray(features, dtype=float)
    if arr.ndim != 2:
        raise ValueError("features must be a 2-d array")
    if not np.all(np.isfinite(arr)):
        # A single NaN would poison the bounds and silently zero out the
        # whole column; fail loudly instead.
        raise ValueError("features must be finite")
    return arr.min(axis=0), arr.max(axis=0)


class LogicNetwork:
    """Stack of pairing, gate and selector layers over normalized inputs."""

    def __init__(
        self,
        feature_count: int,
        class_count: int,
        config: NetworkConfig,
        pairing_tables: list[PairingTable],
        alphas: list[np.ndarray],
        selectors: list[np.ndarray],
        norm_low: np.ndarray,
        norm_high: np.ndarray,
        feature_names: list[str] | None = None,
        label_names: list[str] | None = None,
    ):
        self.feature_count = feature_count
        self.class_count = class_count
        self.config = config
        self.pairing_tables = pairing_tables
        self.alphas = alphas
        self.selectors = selectors
        self.norm_low = norm_low
        self.norm_high = norm_high
        self.feature_names = feature_names
        self.label_names = label_names
        self._version = 0

    # -- structure -------------------------------------------------------

    @property
    def output_width(self) -> int:
        return 1 if self.class_count == 2 else self.class_count

    @property
    def logic_parts(self) -> int:
        return self.config.logic_parts

    def layer_specs(self) -> list[LayerSpec]:
        specs = [LayerSpec("normalization", self.feature_count, self.feature_count)]
        for p, table in enumerate(self.pairing_tables):
            m = table.width_out
            specs.append(LayerSpec("all_pairings", table.width_in, m))
            specs.append(LayerSpec("fuzzy_logic", m, m))
            w_out = self.selectors[p].shape[0]
            specs.append(LayerSpec("feature_selector", m, w_out))
            if p + 1 < len(self.pairing_tables):
                specs.append(LayerSpec("tanh_remap", w_out, w_out))
        specs.append(LayerSpec("max_classifier", self.output_width, self.output_width))
        return specs

    def bump_version(self) -> None:
        """Mark parameters as changed, invalidating existing caches."""
        self._version += 1

    # -- forward ---------------------------------------------------------

    def normalize(self, features: np.ndarray) -> np.ndarray:
        span = self.norm_high - self.norm_low
        safe = np.where(span > 0, span, 1.0)
        z = 2.0 * (features - self.norm_low) / safe - 1.0
        z = np.where(span > 0, z, 0.0)
        return np.clip(z, -1.0, 1.0)

    def forward(self, features: np.ndarray) -> tuple[np.ndarray, ForwardCache]:
        """Run a batch through every layer, returning signed outputs and the
        activation cache needed by :meth:`backward`."""
        arr = np.asarray(features, dtype=float)
        if arr.ndim == 1:
            arr = arr[None, :]
        if arr.ndim != 2 or arr.shape[1] != self.feature_count:
            raise ShapeMismatchError(
                f"expected (*, {self.feature_count}) features, got {arr.shape}"
            )
        cache = ForwardCache(
            version=self._version,
            normalized=self.normalize(arr),
            gate_pre=[], gate_out=[], sel_pre=[], sel_out=[], tanh_out=[],
            outputs=np.empty(0),
        )
        x = cache.normalized
        parts = len(self.pairing_tables)
        for p in range(parts):
            left, right = self.pairing_tables[p].operands(x)
            # Gates evaluate on [0, 1]; layers exchange signed values.
            t = (left + 1.0) / 2.0 + (right + 1.0) / 2.0 - self.alphas[p]
            gate = 2.0 * squash(t, self.config.squash) - 1.0
            pre = gate @ self.selectors[p].T
            sel = np.clip(pre, -1.0, 1.0)
            cache.gate_pre.append(t)
            cache.gate_out.append(gate)
            cache.sel_pre.append(pre)
            cache.sel_out.append(sel)
            if p + 1 < parts:
                x = np.tanh(sel)
                cache.tanh_out.append(x)
            else:
                x = sel
        cache.outputs = x
        return x, cache

    def decide(self, outputs: np.ndarray) -> np.ndarray:
        """Class decisions from signed outputs: binary thresholds the single
        score at 1/2 (ties go to class 1), multi-class takes the first
        maximal output."""
        if self.class_count == 2:
            return (self.scores(outputs)[:, 0] >= 0.5).astype(np.intp)
        return np.argmax(outputs, axis=1)

    def scores(self, outputs: np.ndarray) -> np.ndarray:
        """Outputs mapped from signed values to unit-interval scores."""
        return (outputs + 1.0) / 2.0

    def classify(self, features: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        outputs, _ = self.forward(features)
        return self.decide(outputs), self.scores(outputs)

    # -- backward --------------------------------------------------------

    def backward(self, cache: ForwardCache, grad_outputs: np.ndarray) -> Gradients:
        """Backpropagate loss gradients on the signed outputs down to every
        compensation level and selector weight."""
        if cache.version != self._version:
            raise StaleCacheError("forward cache predates a parameter update")
        grads = Gradients(alphas=[None] * len(self.alphas),
                          selectors=[None] * len(self.selectors))
        g = np.asarray(grad_outputs, dtype=float)
        if g.shape != cache.outputs.shape:
            raise ShapeMismatchError(
                f"gradient shape {g.shape} != outputs {cache.outputs.shape}"
            )
        for p in reversed(range(len(self.pairing_tables))):
            # Clamp passes gradient only strictly inside (-1, 1).
            open_region = (np.abs(cache.sel_pre[p]) < 1.0).astype(float)
            g_pre = g * open_region
            prev = cache.gate_out[p]
            grads.selectors[p] = g_pre.T @ prev
            g_gate = g_pre @ self.selectors[p]
            slope = squash_grad(cache.gate_pre[p], self.config.squash)
            # Signed output is 2 S(t) - 1 and each operand enters t as
            # (v + 1) / 2, so operand gradients carry exactly S'(t).
            g_operand = g_gate * slope
            grads.alphas[p] = -2.0 * np.sum(g_gate * slope, axis=0)
            table = self.pairing_tables[p]
            g_right = g_operand * table.is_pair
            g = table.scatter(g_operand, g_right)
            if p > 0:
                g = g * (1.0 - cache.tanh_out[p - 1] ** 2)
        return grads

    # -- persistence -----------------------------------------------------

    def copy_parameters(self) -> tuple[list[np.ndarray], list[np.ndarray]]:
        return ([a.copy() for a in self.alphas], [w.copy() for w in self.selectors])

    def restore_parameters(
        self, params: tuple[list[np.ndarray], list[np.ndarray]]
    ) -> None:
        alphas, selectors = params
        self.alphas = [a.copy() for a in alphas]
        self.selectors = [w.copy() for w in selectors]
        self.bump_version()

    def to_dict(self) -> dict:
        return {
            "format": FORMAT_NAME,
            "format_version": FORMAT_VERSION,
            "feature_count": self.feature_count,
            "class_count": self.class_count,
            "config": {
                "hidden_width": self.config.hidden_width,
                "logic_parts": self.config.logic_parts,
                "alpha_init": list(self.config.alpha_init),
                "max_pairing_slots": self.config.max_pairing_slots,
                "seed": self.config.seed,
            },
            "squash": {
                "center": self.config.squash.center,
                "ramp_width": self.config.squash.ramp_width,
                "smoothness": self.config.squash.smoothness,
            },
            "layers": [
                {"kind": s.kind, "width_in": s.width_in, "width_out": s.width_out}
                for s in self.layer_specs()
            ],
            "pairings": [
                [p.to_json() for p in table.pairings]
                for table in self.pairing_tables
            ],
            "alphas": [a.tolist() for a in self.alphas],
            "selectors": [w.tolist() for w in self.selectors],
            "normalization": {
                "low": self.norm_low.tolist(),
                "high": self.norm_high.tolist(),
            },
            "feature_names": self.feature_names,
            "label_names": self.label_names,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "LogicNetwork":
        if data.get("format") != FORMAT_NAME:
            raise ValueError("not a recognized model file")
        if data.get("format_version") != FORMAT_VERSION:
            raise ValueError(
                f"unsupported model format version {data.get('format_version')}"
            )
        cfg = data["config"]
        config = NetworkConfig(
            hidden_width=cfg["hidden_width"],
            logic_parts=cfg["logic_parts"],
            squash=SquashParams(**data["squash"]),
            alpha_init=tuple(cfg["alpha_init"]),
            max_pairing_slots=cfg["max_pairing_slots"],
            seed=cfg["seed"],
        )
        alphas = [np.asarray(a, dtype=float) for a in data["alphas"]]
        selectors = [np.asarray(w, dtype=float) for w in data["selectors"]]
        # Table input widths follow the selector chain.
        tables = []
        width = data["feature_count"]
        for p, items in enumerate(data["pairings"]):
            pairings = [Pairing.from_json(item) for item in items]
            tables.append(PairingTable(width, pairings))
            width = selectors[p].shape[0]
        net = cls(
            feature_count=data["feature_count"],
            class_count=data["class_count"],
            config=config,
            pairing_tables=tables,
            alphas=alphas,
            selectors=selectors,
            norm_low=np.asarray(data["normalization"]["low"], dtype=float),
            norm_high=np.asarray(data["normalization"]["high"], dtype=float),
            feature_names=data.get("feature_names"),
            label_names=data.get("label_names"),
        )
        net.validate()
        return net

    def validate(self) -> None:
        """Cross-check widths of pairings, gates and selectors."""
        width = self.feature_count
        if not (len(self.pairing_tables) == len(self.alphas) == len(self.selectors)):
            raise ConfigurationError("layer lists disagree in length")
        for p, table in enumerate(self.pairing_tables):
            if table.width_in != width:
                raise ConfigurationError(
                    f"part {p}: pairing table expects {table.width_in} inputs,"
                    f" chain provides {width}"
                )
            if self.alphas[p].shape != (table.width_out,):
                raise ConfigurationError(f"part {p}: alpha width mismatch")
            if self.selectors[p].shape[1] != table.width_out:
                raise ConfigurationError(f"part {p}: selector width mismatch")
            width = self.selectors[p].shape[0]
        if width != self.output_width:
            raise ConfigurationError(
                f"final selector emits {width}, expected {self.output_width}"
            )
        if self.norm_low.shape != (self.feature_count,) or (
            self.norm_high.shape != (self.feature_count,)
        ):
            raise ConfigurationError("normalization bounds width mismatch")

    def save(self, path: str | Path) -> None:
        Path(path).write_text(serialize_model(self))

    @classmethod
    def load(cls, path: str | Path) -> "LogicNetwork":
        return cls.from_dict(json.loads(Path(path).read_text()))


def serialize_model(net: LogicNetwork) -> str:
    """Canonical JSON text for a network; identical parameters always
    produce identical bytes."""
    return json.dumps(net.to_dict(), indent=2) + "\n"


def build_network(
    feature_count: int,
    class_count: int,
    config: NetworkConfig = NetworkConfig(),
    feature_names: list[str] | None = None,
    label_names: list[str] | None = None,
) -> LogicNetwork:
    """Construct a fresh network with seeded parameter initialization.

    Compensation levels start uniform inside ``config.alpha_init`` and
    selector weights uniform on [-1/2, 1/2] scaled by 1/sqrt(width_in).
    Normalization bounds start at (-1, 1), the identity map; training
    refits them from data.
    """
    if feature_count < 2:
        raise ConfigurationError("need at least 2 features to form pairings")
    if class_count < 2:
        raise ConfigurationError("need at least 2 classes")
    if feature_names is not None and len(feature_names) != feature_count:
        raise ConfigurationError("feature_names length must match feature_count")
    if label_names is not None and len(label_names) != class_count:
        raise ConfigurationError("label_names length must match class_count")
    rng = np.random.default_rng(config.seed)
    tables: list[PairingTable] = []
    alphas: list[np.ndarray] = []
    selectors: list[np.ndarray] = []
    width = feature_count
    out_width = 1 if class_count == 2 else class_count
    for p in range(config.logic_parts):
        slots = width * (width - 1) // 2 + 2 * width
        if slots > config.max_pairing_slots:
            raise ConfigurationError(
                f"part {p}: {slots} pairing slots exceed the cap of"
                f" {config.max_pairing_slots}"
            )
        table = PairingTable.standard(width)
        lo, hi = config.alpha_init
        alphas.append(rng.uniform(lo, hi, size=table.width_out))
        w_out = config.hidden_width if p + 1 < config.logic_parts else out_width
        scale = 1.0 / math.sqrt(table.width_out)
        selectors.append(rng.uniform(-0.5, 0.5, size=(w_out, table.width_out)) * scale)
        tables.append(table)
        width = w_out
    return LogicNetwork(
        feature_count=feature_count,
        class_count=class_count,
        config=config,
        pairing_tables=tables,
        alphas=alphas,
        selectors=selectors,
        norm_low=-np.ones(feature_count),
        norm_high=np.ones(feature_count),
        feature_names=feature_names,
        label_names=label_names,
    )
