"""
Stream temperature stress and cooling-water physics of thermoelectric plants.

Units are SI throughout (W, m3/s, K, degC); inventory capacities in MW are
converted by :func:`plant_thermal_spec`.

Heat rejected to cooling water per watt of output is
``(1 - eta_total) / eta_elec``. Once-through plants discharge the share
``(1 - alpha)`` of it to the stream; recirculating plants the share
``(1 - alpha)(1 - beta) * omega * epsilon``.
"""

from __future__ import annotations

import logging
import math
from pathlib import Path
from typing import Mapping, Optional, Set, Union

import pandas as pd

from app.domain.errors import DatasetParseError, ThermalShutdownError
from app.domain.models import DEFAULT_THRESHOLD_C, PlantRecord, PlantThermalSpec, StateThresholds, ThermalDefaults

logger = logging.getLogger(__name__)

BUNDLED_THRESHOLDS = Path(__file__).resolve().parent.parent / "data" / "state_thresholds.csv"

# Percent efficiency loss per degC of air / stream warming
AIR_SENSITIVITY_PCT = 0.01
STREAM_SENSITIVITY_PCT = 0.02


def load_thresholds(path: Union[str, Path, None] = None) -> StateThresholds:
    """Read a ``state,threshold_c`` table (the bundled one when ``path`` is None)."""
    path = Path(path) if path is not None else BUNDLED_THRESHOLDS
    try:
        frame = pd.read_csv(path, dtype={"state": str, "threshold_c": float})
    except (pd.errors.ParserError, ValueError) as e:
        raise DatasetParseError(str(e), path=str(path))
    missing = {"state", "threshold_c"} - set(frame.columns)
    if missing:
        raise DatasetParseError(f"missing columns {sorted(missing)}", path=str(path))
    thresholds = {str(s).strip(): float(t) for s, t in zip(frame["state"], frame["threshold_c"])}
    return StateThresholds(thresholds=thresholds, default_c=DEFAULT_THRESHOLD_C)


def wtsi(
    stream_max_c: float,
    state: str,
    thresholds: StateThresholds,
    unknown_states: Optional[Set[str]] = None,
) -> int:
    """
    Water Temperature Stress Index: 1 when the maximum stream temperature
    strictly exceeds the state's allowable limit, else 0.

    States missing from the table use the default limit; they are added to
    ``unknown_states`` when a collector is given.
    """
    if not thresholds.is_known(state):
        if unknown_states is not None:
            unknown_states.add(state)
        logger.debug(f"No threshold for state '{state}', using {thresholds.default_c} degC")
    return int(stream_max_c > thresholds.threshold_for(state))


def allowable_rise(t_max_c: float, t_water_c: float, dt_max_k: float) -> float:
    """Permitted cooling-water temperature rise max(min(T_max - T_w, dT_max), 0)."""
    return max(min(t_max_c - t_water_c, dt_max_k), 0.0)


def _heat_factor(spec: PlantThermalSpec) -> float:
    return (1.0 - spec.eta_total) / spec.eta_elec


def _recirc_share(spec: PlantThermalSpec) -> float:
    return (1.0 - spec.alpha_heat) * (1.0 - spec.beta_air) * spec.omega * spec.epsilon


def _withdrawal(spec: PlantThermalSpec, t_water_c: float, share: float) -> float:
    rise = allowable_rise(spec.t_max_c, t_water_c, spec.dt_max_k)
    if rise == 0:
        raise ThermalShutdownError(
            f"intake at {t_water_c} degC leaves no temperature headroom below {spec.t_max_c} degC"
        )
    return spec.capacity_w * _heat_factor(spec) * share / (spec.rho_w * spec.c_p * rise)


def _capacity(spec: PlantThermalSpec, t_water_c: float, flow_m3s: float, share: float) -> float:
    rise = allowable_rise(spec.t_max_c, t_water_c, spec.dt_max_k)
    if rise == 0:
        return 0.0
    denominator = _heat_factor(spec) * spec.lambda_eff * share
    if denominator == 0:
        return spec.capacity_w
    required = _withdrawal(spec, t_water_c, share)
    available = math.inf if math.isinf(flow_m3s) else spec.gamma_flow * flow_m3s
    if available >= required:
        return min(spec.capacity_w, spec.capacity_w / spec.lambda_eff)
    usable = available * spec.rho_w * spec.c_p * rise / denominator
    return min(usable, spec.capacity_w)


def once_through_withdrawal(spec: PlantThermalSpec, t_water_c: float) -> float:
    """
    Required withdrawal (m3/s) of an open-loop plant at full output.

    Raises:
        ThermalShutdownError: when the intake leaves no allowable rise.
    """
    return _withdrawal(spec, t_water_c, 1.0 - spec.alpha_heat)


def once_through_capacity(spec: PlantThermalSpec, t_water_c: float, flow_m3s: float) -> float:
    """Maximum usable capacity (W) of an open-loop plant given the natural streamflow."""
    return _capacity(spec, t_water_c, flow_m3s, 1.0 - spec.alpha_heat)


def recirc_withdrawal(spec: PlantThermalSpec, t_water_c: float) -> float:
    """Required withdrawal (m3/s) of a recirculating plant at full output."""
    return _withdrawal(spec, t_water_c, _recirc_share(spec))


def recirc_capacity(spec: PlantThermalSpec, t_water_c: float, flow_m3s: float) -> float:
    """Maximum usable capacity (W) of a recirculating plant."""
    return _capacity(spec, t_water_c, flow_m3s, _recirc_share(spec))


def usable_capacity(spec: PlantThermalSpec, t_water_c: float, flow_m3s: float = math.inf) -> float:
    """Usable capacity (W) by cooling class; dry and hybrid plants keep their installed capacity."""
    if spec.cooling == "once_through":
        return once_through_capacity(spec, t_water_c, flow_m3s)
    if spec.cooling == "recirculating":
        return recirc_capacity(spec, t_water_c, flow_m3s)
    return spec.capacity_w


def efficiency_sensitivity(delta_air_k: float, delta_stream_k: float) -> float:
    """Change in plant efficiency (percent) for given air and stream warming."""
    return -(AIR_SENSITIVITY_PCT * delta_air_k + STREAM_SENSITIVITY_PCT * delta_stream_k)


_OVERRIDABLE = (
    "eta_total", "eta_elec", "alpha_heat", "beta_air", "omega",
    "epsilon", "lambda_eff", "gamma_flow", "dt_max_k", "t_max_c",
)


def plant_thermal_spec(
    plant: PlantRecord,
    defaults: ThermalDefaults = ThermalDefaults(),
    overrides: Optional[Mapping[str, float]] = None,
) -> PlantThermalSpec:
    """
    Physics parameters of a plant: inventory columns first, then
    ``overrides`` (e.g. a state temperature limit), then configured defaults.
    """
    params = {name: getattr(defaults, name) for name in _OVERRIDABLE}
    for source in (overrides or {}, plant.thermal):
        params.update({k: float(v) for k, v in source.items() if k in params})
    return PlantThermalSpec(capacity_w=plant.nameplate_mw * 1e6, cooling=plant.cooling, **params)
