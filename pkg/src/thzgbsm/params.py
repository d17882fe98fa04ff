"""Scenario parameter sets: schema, validation, serialization.

A parameter set bundles everything one scenario/condition/source needs:
path loss model coefficients, large-scale parameter distributions
(delay spread, azimuth spread, shadow fading, K-factor), their
cross-correlation matrix, intra-cluster statistics, correlation
distances, and the supplemental quantities the generation recipe needs
but that the measurement campaign did not estimate (delay scaling
factor, per-cluster shadowing, XPR, zenith spreads, geometry).

Sets are stored as YAML, one file per (scenario, condition, source).
The bundled files live in ``thzgbsm/data``; the environment variable
``THZ_GBSM_PARAMS_DIR`` points the loader at an alternative directory.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field, asdict
from pathlib import Path

import numpy as np
import yaml

SCENARIOS = ("office", "umi")
CONDITIONS = ("los", "nlos")
SOURCES = ("measured", "3gpp")

#: Canonical ordering of large-scale parameters in correlation matrices.
LSP_ORDER = ("ds", "asa", "sf", "k")

DATA_ENV_VAR = "THZ_GBSM_PARAMS_DIR"


class ParamValidationError(ValueError):
    """Raised when a parameter set fails validation; lists every issue."""

    def __init__(self, issues):
        self.issues = list(issues)
        super().__init__("invalid parameter set:\n" + "\n".join(f"- {i}" for i in self.issues))


@dataclass
class LogNormalSpec:
    """Lognormal in log10 domain: value = 10**(mu + sigma*x), x ~ N(0,1)."""
    mu: float
    sigma: float


@dataclass
class NormalSpec:
    """Plain normal spec (dB domain for the K-factor and XPR)."""
    mu: float
    sigma: float


@dataclass
class PathLossSpec:
    model: str                 # "ci" or "umi_nlos_3gpp"
    sigma_sf_db: float
    ple: float | None = None   # close-in exponent; None for the fixed-slope model


@dataclass
class ClusterSpec:
    count: int
    rays: int
    c_ds_ns: float
    c_asa_deg: float
    c_k_db: float
    count_log10: LogNormalSpec | None = None  # optional lognormal cluster-count mode


@dataclass
class SupplementalSpec:
    """Recipe inputs not estimated by the measurement campaign.

    Values follow common 3GPP defaults for the matching scenario and are
    shared verbatim between the measured and 3gpp variants of a scenario
    so that source comparisons isolate the measured statistics.
    """
    r_tau: float
    per_cluster_shadow_db: float
    xpr_db: NormalSpec
    zsa_log10deg: LogNormalSpec
    zsd_log10deg: LogNormalSpec
    c_zsa_deg: float
    c_zsd_deg: float


@dataclass
class GeometrySpec:
    bs_height_m: float
    mu_height_m: float
    annulus_m: tuple[float, float]   # (min, max) horizontal link distance


@dataclass
class ScenarioParamSet:
    scenario: str
    condition: str
    source: str
    carrier_frequency_ghz: float
    pathloss: PathLossSpec
    ds_log10s: LogNormalSpec
    asa_log10deg: LogNormalSpec
    clusters: ClusterSpec
    supplemental: SupplementalSpec
    geometry: GeometrySpec
    corr_dist_m: dict = field(default_factory=dict)   # keys from LSP_ORDER
    xcorr: dict = field(default_factory=dict)         # pair keys like "ds_sf"
    k_db: NormalSpec | None = None                    # LoS only

    # -- derived ---------------------------------------------------------

    @property
    def has_k(self) -> bool:
        return self.k_db is not None

    @property
    def lsp_names(self) -> tuple[str, ...]:
        return LSP_ORDER if self.has_k else LSP_ORDER[:3]

    @property
    def wavelength_m(self) -> float:
        from .constants import SPEED_OF_LIGHT
        return SPEED_OF_LIGHT / (self.carrier_frequency_ghz * 1e9)

    def xcorr_matrix(self) -> np.ndarray:
        """Cross-correlation matrix in LSP_ORDER, as stored (no projection)."""
        names = self.lsp_names
        n = len(names)
        c = np.eye(n)
        for i in range(n):
            for j in range(i + 1, n):
                c[i, j] = c[j, i] = _pair_lookup(self.xcorr, names[i], names[j])
        return c

    def label(self) -> str:
        return f"{self.scenario}_{self.condition}_{self.source}"

    # -- validation ------------------------------------------------------

    def validate(self) -> None:
        issues = []
        if self.scenario not in SCENARIOS:
            issues.append(f"scenario: expected one of {SCENARIOS}, got {self.scenario!r}")
        if self.condition not in CONDITIONS:
            issues.append(f"condition: expected one of {CONDITIONS}, got {self.condition!r}")
        if self.source not in SOURCES:
            issues.append(f"source: expected one of {SOURCES}, got {self.source!r}")
        if not self.carrier_frequency_ghz > 0:
            issues.append("carrier_frequency_ghz: must be positive")

        if self.pathloss.model not in ("ci", "umi_nlos_3gpp"):
            issues.append(f"pathloss.model: unknown model {self.pathloss.model!r}")
        if self.pathloss.model == "ci" and self.pathloss.ple is None:
            issues.append("pathloss.ple: required for the ci model")
        if self.pathloss.sigma_sf_db < 0:
            issues.append("pathloss.sigma_sf_db: must be nonnegative")

        for name, spec in (("ds_log10s", self.ds_log10s), ("asa_log10deg", self.asa_log10deg)):
            if spec.sigma < 0:
                issues.append(f"{name}.sigma: must be nonnegative")
        if self.condition == "los" and self.k_db is None:
            issues.append("k_db: required when condition is los")
        if self.condition == "nlos" and self.k_db is not None:
            issues.append("k_db: must be absent when condition is nlos")
        if self.k_db is not None and self.k_db.sigma < 0:
            issues.append("k_db.sigma: must be nonnegative")

        if self.clusters.count < 1:
            issues.append("clusters.count: must be at least 1")
        if not 1 <= self.clusters.rays <= 20:
            issues.append("clusters.rays: must be in 1..20")
        for fname in ("c_ds_ns", "c_asa_deg"):
            if getattr(self.clusters, fname) < 0:
                issues.append(f"clusters.{fname}: must be nonnegative")

        if self.supplemental.r_tau <= 1:
            issues.append("supplemental.r_tau: must exceed 1")
        if self.supplemental.per_cluster_shadow_db < 0:
            issues.append("supplemental.per_cluster_shadow_db: must be nonnegative")

        names = self.lsp_names
        for key in self.corr_dist_m:
            if key not in names:
                issues.append(f"corr_dist_m: unknown parameter {key!r}")
        for nm in names:
            if nm not in self.corr_dist_m:
                issues.append(f"corr_dist_m: missing entry for {nm!r}")
            elif not self.corr_dist_m[nm] > 0:
                issues.append(f"corr_dist_m[{nm!r}]: must be positive")

        expected_pairs = {_pair_key(a, b) for i, a in enumerate(names) for b in names[i + 1:]}
        seen = set(self.xcorr)
        for key in sorted(seen - expected_pairs):
            issues.append(f"xcorr: unexpected pair {key!r}")
        for key in sorted(expected_pairs - seen):
            issues.append(f"xcorr: missing pair {key!r}")
        for key in sorted(seen & expected_pairs):
            v = self.xcorr[key]
            if not -1.0 <= v <= 1.0:
                issues.append(f"xcorr[{key!r}]: correlation {v} outside [-1, 1]")

        g = self.geometry
        if g.bs_height_m <= 0 or g.mu_height_m <= 0:
            issues.append("geometry: heights must be positive")
        if not (0 < g.annulus_m[0] <= g.annulus_m[1]):
            issues.append("geometry.annulus_m: need 0 < min <= max")

        if issues:
            raise ParamValidationError(issues)

    # -- serialization ---------------------------------------------------

    def to_dict(self) -> dict:
        d = asdict(self)
        if d["k_db"] is None:
            del d["k_db"]
        if d["clusters"]["count_log10"] is None:
            del d["clusters"]["count_log10"]
        d["geometry"]["annulus_m"] = list(d["geometry"]["annulus_m"])
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ScenarioParamSet":
        d = dict(d)
        issues = []

        def take(mapping, key, where):
            if key not in mapping:
                issues.append(f"{where}: missing key {key!r}")
                return None
            return mapping.pop(key)

        def subspec(mapping, key, spec_cls, where, optional=False):
            raw = mapping.pop(key, None)
            if raw is None:
                if not optional:
                    issues.append(f"{where}: missing key {key!r}")
                return None
            try:
                return spec_cls(**raw)
            except TypeError as exc:
                issues.append(f"{where}.{key}: {exc}")
                return None

        scenario = take(d, "scenario", "top level")
        condition = take(d, "condition", "top level")
        source = take(d, "source", "top level")
        fc = take(d, "carrier_frequency_ghz", "top level")
        pl_raw = take(d, "pathloss", "top level") or {}
        ds = subspec(d, "ds_log10s", LogNormalSpec, "top level")
        asa = subspec(d, "asa_log10deg", LogNormalSpec, "top level")
        k = subspec(d, "k_db", NormalSpec, "top level", optional=True)
        xcorr = d.pop("xcorr", {})
        corr = d.pop("corr_dist_m", {})

        cl_raw = take(d, "clusters", "top level") or {}
        count_ln = None
        if "count_log10" in cl_raw:
            count_ln = LogNormalSpec(**cl_raw.pop("count_log10"))
        try:
            clusters = ClusterSpec(count_log10=count_ln, **cl_raw)
        except TypeError as exc:
            issues.append(f"clusters: {exc}")
            clusters = None

        sup_raw = take(d, "supplemental", "top level") or {}
        try:
            supplemental = SupplementalSpec(
                r_tau=sup_raw["r_tau"],
                per_cluster_shadow_db=sup_raw["per_cluster_shadow_db"],
                xpr_db=NormalSpec(**sup_raw["xpr_db"]),
                zsa_log10deg=LogNormalSpec(**sup_raw["zsa_log10deg"]),
                zsd_log10deg=LogNormalSpec(**sup_raw["zsd_log10deg"]),
                c_zsa_deg=sup_raw["c_zsa_deg"],
                c_zsd_deg=sup_raw["c_zsd_deg"],
            )
        except (KeyError, TypeError) as exc:
            issues.append(f"supplemental: missing or malformed field ({exc})")
            supplemental = None

        geo_raw = take(d, "geometry", "top level") or {}
        try:
            geometry = GeometrySpec(
                bs_height_m=geo_raw["bs_height_m"],
                mu_height_m=geo_raw["mu_height_m"],
                annulus_m=tuple(geo_raw["annulus_m"]),
            )
        except (KeyError, TypeError) as exc:
            issues.append(f"geometry: missing or malformed field ({exc})")
            geometry = None

        try:
            pathloss = PathLossSpec(**pl_raw)
        except TypeError as exc:
            issues.append(f"pathloss: {exc}")
            pathloss = None

        for key in sorted(d):
            issues.append(f"top level: unknown key {key!r}")
        if issues:
            raise ParamValidationError(issues)

        ps = cls(
            scenario=scenario, condition=condition, source=source,
            carrier_frequency_ghz=float(fc), pathloss=pathloss,
            ds_log10s=ds, asa_log10deg=asa, clusters=clusters,
            supplemental=supplemental, geometry=geometry,
            corr_dist_m=dict(corr), xcorr=dict(xcorr), k_db=k,
        )
        ps.validate()
        return ps

    def save(self, path) -> None:
        Path(path).write_text(yaml.safe_dump(self.to_dict(), sort_keys=True))


def _pair_key(a: str, b: str) -> str:
    # Stored pair keys follow LSP_ORDER precedence, e.g. "ds_sf", "asa_k".
    ia, ib = LSP_ORDER.index(a), LSP_ORDER.index(b)
    return f"{a}_{b}" if ia < ib else f"{b}_{a}"


def _pair_lookup(xcorr: dict, a: str, b: str) -> float:
    return float(xcorr[_pair_key(a, b)])


def nearest_psd(c: np.ndarray) -> np.ndarray:
    """Project a correlation matrix onto the nearest PSD correlation matrix.

    Symmetric PSD inputs are returned unchanged (a copy). Indefinite
    inputs have their negative eigenvalues clipped to zero and the
    diagonal renormalized back to ones; the result is symmetric PSD with
    unit diagonal. Raises ValueError for non-symmetric or non-unit-diagonal
    input.
    """
    c = np.asarray(c, dtype=float)
    if c.ndim != 2 or c.shape[0] != c.shape[1]:
        raise ValueError("correlation matrix must be square")
    if not np.allclose(c, c.T, atol=1e-12):
        raise ValueError("correlation matrix must be symmetric")
    if not np.allclose(np.diag(c), 1.0, atol=1e-12):
        raise ValueError("correlation matrix must have unit diagonal")
    w, v = np.linalg.eigh(c)
    if w.min() >= -1e-12:
        return c.copy()
    w = np.clip(w, 0.0, None)
    out = (v * w) @ v.T
    d = np.sqrt(np.diag(out))
    out = out / np.outer(d, d)
    out = (out + out.T) / 2.0
    np.fill_diagonal(out, 1.0)
    return out


def data_dir() -> Path:
    override = os.environ.get(DATA_ENV_VAR)
    if override:
        return Path(override)
    return Path(__file__).parent / "data"


def load_params_file(path) -> list[ScenarioParamSet]:
    """Load one YAML file holding a single set or a list of sets."""
    path = Path(path)
    raw = yaml.safe_load(path.read_text())
    if raw is None:
        raise ParamValidationError([f"{path}: file is empty"])
    docs = raw if isinstance(raw, list) else [raw]
    sets = []
    for i, doc in enumerate(docs):
        if not isinstance(doc, dict):
            raise ParamValidationError([f"{path}: entry {i} is not a mapping"])
        try:
            sets.append(ScenarioParamSet.from_dict(doc))
        except ParamValidationError as exc:
            raise ParamValidationError([f"{path}: {issue}" for issue in exc.issues]) from exc
    return sets


def load_params(scenario: str, condition: str, source: str,
                params_dir=None) -> ScenarioParamSet:
    """Load one bundled (or overridden) parameter set by its coordinates."""
    base = Path(params_dir) if params_dir is not None else data_dir()
    path = base / f"{scenario}_{condition}_{source}.yaml"
    if not path.is_file():
        raise FileNotFoundError(
            f"no parameter file {path.name} under {base} "
            f"(scenario={scenario!r}, condition={condition!r}, source={source!r})")
    sets = load_params_file(path)
    if len(sets) != 1:
        raise ParamValidationError([f"{path}: expected exactly one set, found {len(sets)}"])
    ps = sets[0]
    if (ps.scenario, ps.condition, ps.source) != (scenario, condition, source):
        raise ParamValidationError(
            [f"{path}: file coordinates {ps.label()} do not match request"])
    return ps


def available_sets(params_dir=None) -> list[tuple[str, str, str]]:
    base = Path(params_dir) if params_dir is not None else data_dir()
    out = []
    for p in sorted(base.glob("*.yaml")):
        parts = p.stem.split("_")
        if len(parts) == 3:
            out.append(tuple(parts))
    return out
