"""Flat key=value config files and saved optimizer states.

Config keys mirror the ScenarioConfig fields; dBm quantities carry a ``_dbm``
suffix and positions are comma pairs, e.g. ``alice_pos=0,0``. The active set
is given with 1-based indices to match array-element numbering.
"""

from __future__ import annotations

import hashlib
import json

import numpy as np

from .channel import Geometry
from .system import BeamState, PhaseState, ScenarioConfig

_FLOAT_KEYS = {
    "p_a_dbm", "p_m_dbm", "p_rmax_dbm", "beta",
    "sigma_b_dbm", "sigma_m_dbm", "sigma_r_dbm",
    "loss_const", "epsilon", "solver_tol", "spacing", "rho",
}
_INT_KEYS = {"n_a", "n_b", "n_m", "m", "k", "seed", "trials", "max_outer", "n_j"}
_POS_KEYS = {"alice_pos", "irs_pos", "bob_pos", "mallory_pos"}
_ORIENT_KEYS = {"alice_orient", "irs_orient", "bob_orient", "mallory_orient"}


def parse_config(text: str) -> ScenarioConfig:
    kv = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"line {lineno}: expected key=value, got {raw!r}")
        key, val = (s.strip() for s in line.split("=", 1))
        kv[key.lower()] = val

    def pair(val):
        x, y = (float(s) for s in val.split(","))
        return (x, y)

    geom_kw = {}
    cfg_kw = {}
    for key, val in kv.items():
        if key in _POS_KEYS:
            geom_kw[key[:-4]] = pair(val)
        elif key in _ORIENT_KEYS:
            geom_kw[key] = pair(val)
        elif key == "spacing":
            geom_kw["spacing"] = float(val)
        elif key in _FLOAT_KEYS:
            cfg_kw[key] = float(val)
        elif key in _INT_KEYS:
            cfg_kw[key] = int(val)
        elif key == "active_set":
            if val.strip():
                cfg_kw["active_set"] = tuple(int(s) - 1 for s in val.split(","))
            else:
                cfg_kw["active_set"] = ()
        else:
            raise ValueError(f"unknown config key {key!r}")
    if geom_kw:
        cfg_kw["geometry"] = Geometry(**geom_kw)
    return ScenarioConfig(**cfg_kw)


def load_config(path: str) -> ScenarioConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config(fh.read())


def config_hash(cfg: ScenarioConfig) -> str:
    geo = cfg.geometry
    canon = {
        "p_a_dbm": cfg.p_a_dbm, "p_m_dbm": cfg.p_m_dbm,
        "p_rmax_dbm": cfg.p_rmax_dbm, "beta": cfg.beta,
        "n_a": cfg.n_a, "n_b": cfg.n_b, "n_m": cfg.n_m,
        "m": cfg.m, "k": cfg.k, "active_set": list(cfg.active_set),
        "sigma_b_dbm": cfg.sigma_b_dbm, "sigma_m_dbm": cfg.sigma_m_dbm,
        "sigma_r_dbm": cfg.sigma_r_dbm,
        "positions": [list(geo.alice), list(geo.irs), list(geo.bob),
                      list(geo.mallory)],
        "orients": [list(geo.alice_orient), list(geo.irs_orient),
                    list(geo.bob_orient), list(geo.mallory_orient)],
        "spacing": geo.spacing, "loss_const": cfg.loss_const,
    }
    blob = json.dumps(canon, sort_keys=True).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


def _vec_to_pairs(v: np.ndarray) -> list:
    return [[float(x.real), float(x.imag)] for x in np.asarray(v, dtype=complex)]


def _pairs_to_vec(pairs) -> np.ndarray:
    return np.array([complex(re, im) for re, im in pairs], dtype=complex)


def save_state(path: str, cfg: ScenarioConfig, phase: PhaseState,
               beam: BeamState) -> None:
    doc = {
        "config_hash": config_hash(cfg),
        "theta": _vec_to_pairs(phase.theta),
        "v": _vec_to_pairs(beam.v),
        "v_br": _vec_to_pairs(beam.v_br),
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=1)
        fh.write("\n")


def load_state(path: str, cfg: ScenarioConfig) -> tuple[PhaseState, BeamState]:
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    if doc.get("config_hash") != config_hash(cfg):
        raise ValueError("state file was produced under a different config "
                         f"(hash {doc.get('config_hash')} != {config_hash(cfg)})")
    theta = _pairs_to_vec(doc["theta"])
    if theta.size != cfg.m:
        raise ValueError(f"state has {theta.size} phase entries, config wants {cfg.m}")
    phase = PhaseState(theta=theta, active_mask=cfg.active_mask)
    beam = BeamState(v=_pairs_to_vec(doc["v"]), v_br=_pairs_to_vec(doc["v_br"]))
    return phase, beam
