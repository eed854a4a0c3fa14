"""HTTP service exposing pulse synthesis, gate times and simulation recipes.

All request/response frequencies are plain MHz (or kHz where noted); the
2*pi and the rad/ns internals never cross the wire.  Errors carry an
``error_type`` of either "config" (bad input, client fixable) or "physics"
(no solution / integration failure), which the CLI maps onto exit codes.
"""

from __future__ import annotations

import math

import numpy as np
from fastapi import FastAPI
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from . import experiments, presets
from .device import ConfigError
from .lindblad import IntegrationError
from .numerics import from_mhz, to_mhz
from .toc import (SynthesisError, cp_target, gate_time, named_target,
                  optimal_detuning, synthesize)

app = FastAPI(title="tocgates", version="0.1.0")


class ConfigProblem(Exception):
    pass


class PhysicsProblem(Exception):
    pass


@app.exception_handler(ConfigProblem)
async def _config_problem(request, exc):
    return JSONResponse(status_code=400,
                        content={"error_type": "config", "message": str(exc)})


@app.exception_handler(PhysicsProblem)
async def _physics_problem(request, exc):
    return JSONResponse(status_code=409,
                        content={"error_type": "physics", "message": str(exc)})


def _guard(fn, *args, **kwargs):
    """Run a library call, sorting exceptions into config vs physics."""
    try:
        return fn(*args, **kwargs)
    except (SynthesisError, IntegrationError) as exc:
        raise PhysicsProblem(str(exc)) from exc
    except ConfigError as exc:
        raise ConfigProblem(str(exc)) from exc
    except ValueError as exc:
        # remaining ValueErrors from the physics layer are infeasibility
        raise PhysicsProblem(str(exc)) from exc


class PulseOut(BaseModel):
    gate: str
    omega_mhz: float
    delta_mhz: float
    eta_rad_per_ns: float
    phi0_rad: float
    tau_ns: float
    chi_rad: float


class SynthRequest(BaseModel):
    gate: str = Field(description="H, S, T or CP")
    omega_mhz: float = Field(gt=0)
    delta_mhz: float | None = None
    gamma_rad: float | None = Field(default=None,
                                    description="conditional phase, CP only")


@app.get("/health")
def health() -> dict:
    return {"status": "ok", "service": "tocgates"}


def _target_for(gate: str, gamma_rad: float | None):
    if gate.upper() == "CP":
        if gamma_rad is None:
            raise ConfigProblem("CP synthesis requires gamma_rad")
        return _guard(cp_target, gamma_rad)
    try:
        return named_target(gate)
    except ValueError as exc:
        raise ConfigProblem(str(exc)) from exc


@app.post("/synth", response_model=PulseOut)
def synth(req: SynthRequest) -> PulseOut:
    target = _target_for(req.gate, req.gamma_rad)
    delta = None if req.delta_mhz is None else from_mhz(req.delta_mhz)
    pulse = _guard(synthesize, target, from_mhz(req.omega_mhz), delta)
    return PulseOut(gate=req.gate.upper(), omega_mhz=to_mhz(pulse.omega),
                    delta_mhz=to_mhz(pulse.delta),
                    eta_rad_per_ns=pulse.eta, phi0_rad=pulse.phi0,
                    tau_ns=pulse.tau, chi_rad=pulse.chi)


class GateTimeRequest(BaseModel):
    gate: str
    omega_mhz: float = Field(gt=0)
    delta_mhz: float = 0.0
    gamma_rad: float | None = None


@app.post("/gate-time")
def gate_time_endpoint(req: GateTimeRequest) -> dict:
    tau = _guard(gate_time, req.gate, from_mhz(req.omega_mhz),
                 from_mhz(req.delta_mhz), req.gamma_rad)
    return {"gate": req.gate.upper(), "tau_ns": tau}


class OptimalDetuningRequest(BaseModel):
    gate: str
    omega_mhz: float = Field(gt=0)
    delta_min_mhz: float
    delta_max_mhz: float
    gamma_rad: float | None = None


@app.post("/optimal-detuning")
def optimal_detuning_endpoint(req: OptimalDetuningRequest) -> dict:
    d, tau = _guard(optimal_detuning, req.gate, from_mhz(req.omega_mhz),
                    (from_mhz(req.delta_min_mhz), from_mhz(req.delta_max_mhz)),
                    req.gamma_rad)
    return {"gate": req.gate.upper(), "delta_mhz": to_mhz(d), "tau_ns": tau}


class ValidateRequest(BaseModel):
    config: dict | None = None
    bessel_order: int = experiments.DEFAULT_BESSEL_ORDER


@app.post("/validate")
def validate(req: ValidateRequest) -> dict:
    return _guard(experiments.validate_setup, req.config,
                  n_bessel=req.bessel_order)


class RecipeCommon(BaseModel):
    dt_ps: float = Field(default=1.0, gt=0)
    decoherence: bool = True
    bessel_order: int = experiments.DEFAULT_BESSEL_ORDER
    jobs: int = 1

    @property
    def dt_ns(self) -> float:
        return self.dt_ps * 1e-3


class DynamicsRequest(RecipeCommon):
    gate: str
    dt_ps: float = Field(default=0.5, gt=0)
    n_samples: int = 400
    config: dict | None = None


class SweepRequest(RecipeCommon):
    gate: str
    delta12_min_mhz: float = 400.0
    delta12_max_mhz: float = 650.0
    n_delta12: int = 26
    g12_min_mhz: float = 10.0
    g12_max_mhz: float = 20.0
    n_g12: int = 21
    rate_khz: float = presets.DEFAULT_RATE_KHZ


class RobustnessRequest(RecipeCommon):
    gate: str = "H"
    beta_min: float = -0.1
    beta_max: float = 0.1
    n_points: int = 41
    config: dict | None = None


class Tau2SurfaceRequest(BaseModel):
    gamma_min_rad: float = 0.05
    gamma_max_rad: float = 2.0 * math.pi - 0.05
    n_gamma: int = 50
    ratio_min: float = 0.0
    ratio_max: float = 4.0
    n_ratio: int = 41
    g24_mhz: float = 7.0
    omega_mhz: float | None = None


class CpSweepRequest(RecipeCommon):
    delta24_min_mhz: float = 550.0
    delta24_max_mhz: float = 650.0
    n_delta24: int = 5
    g24_min_mhz: float = 5.0
    g24_max_mhz: float = 9.0
    n_g24: int = 5
    gamma_rad: float = presets.CP_PHASE


class CpDynamicsRequest(RecipeCommon):
    gamma_rad: float = presets.CP_PHASE
    include_spectators: bool = True
    noise_sites: list[int] | None = None
    n_samples: int = 400
    config: dict | None = None


def _result_payload(result: experiments.RecipeResult) -> dict:
    return {"recipe": result.recipe, "columns": list(result.columns),
            "csv": result.to_csv_text(), "metadata": result.metadata}


@app.post("/recipes/dynamics")
def recipe_dynamics(req: DynamicsRequest) -> dict:
    result = _guard(experiments.run_single_gate_dynamics, req.gate,
                    config=req.config, dt=req.dt_ns,
                    decoherence=req.decoherence, n_samples=req.n_samples,
                    n_bessel=req.bessel_order)
    return _result_payload(result)


@app.post("/recipes/sweep")
def recipe_sweep(req: SweepRequest) -> dict:
    result = _guard(
        experiments.run_fidelity_sweep, req.gate,
        delta12_mhz=np.linspace(req.delta12_min_mhz, req.delta12_max_mhz,
                                req.n_delta12),
        g12_mhz=np.linspace(req.g12_min_mhz, req.g12_max_mhz, req.n_g12),
        dt=req.dt_ns, decoherence=req.decoherence, rate_khz=req.rate_khz,
        n_bessel=req.bessel_order, jobs=req.jobs)
    return _result_payload(result)


@app.post("/recipes/robustness")
def recipe_robustness(req: RobustnessRequest) -> dict:
    result = _guard(experiments.run_drift_robustness, req.gate,
                    beta_range=(req.beta_min, req.beta_max),
                    n_points=req.n_points, config=req.config, dt=req.dt_ns,
                    decoherence=req.decoherence, n_bessel=req.bessel_order,
                    jobs=req.jobs)
    return _result_payload(result)


@app.post("/recipes/tau2-surface")
def recipe_tau2_surface(req: Tau2SurfaceRequest) -> dict:
    omega = None if req.omega_mhz is None else from_mhz(req.omega_mhz)
    result = _guard(
        experiments.run_tau2_surface,
        gamma_values=np.linspace(req.gamma_min_rad, req.gamma_max_rad,
                                 req.n_gamma),
        ratio_values=np.linspace(req.ratio_min, req.ratio_max, req.n_ratio),
        omega=omega, g24_mhz=req.g24_mhz)
    return _result_payload(result)


@app.post("/recipes/cp-sweep")
def recipe_cp_sweep(req: CpSweepRequest) -> dict:
    result = _guard(
        experiments.run_cp_sweep,
        delta24_mhz=np.linspace(req.delta24_min_mhz, req.delta24_max_mhz,
                                req.n_delta24),
        g24_mhz=np.linspace(req.g24_min_mhz, req.g24_max_mhz, req.n_g24),
        gamma_cp=req.gamma_rad, dt=req.dt_ns, decoherence=req.decoherence,
        n_bessel=req.bessel_order, jobs=req.jobs)
    return _result_payload(result)


@app.post("/recipes/cp-dynamics")
def recipe_cp_dynamics(req: CpDynamicsRequest) -> dict:
    noise_sites = None if req.noise_sites is None else tuple(req.noise_sites)
    result = _guard(experiments.run_cp_dynamics, config=req.config,
                    gamma_cp=req.gamma_rad, dt=req.dt_ns,
                    decoherence=req.decoherence,
                    include_spectators=req.include_spectators,
                    noise_sites=noise_sites, n_samples=req.n_samples,
                    n_bessel=req.bessel_order)
    return _result_payload(result)
