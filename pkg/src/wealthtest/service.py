"""HTTP service hosting live sequential-test sessions.

Plain JSON over a versioned prefix:

    POST /v1/sessions                      create (idempotent via idempotency_key)
    POST /v1/sessions/{id}/observations    commit one observation
    POST /v1/sessions/{id}/preview         what-if: same computation, no commit
    POST /v1/sessions/{id}/draw            PPS draw from the bound population
    GET  /v1/sessions/{id}                 current view incl. trajectory
    GET  /v1/sessions/{id}/events          raw event log

State is a fold over the per-session JSONL event log; restarting the service
replays the logs.  Decisions are latched: once Reject, always Reject.
"""

from __future__ import annotations

import copy
import math
import os
import threading
import uuid
import warnings
from dataclasses import dataclass, field
from typing import Dict, List, Optional

import numpy as np
from fastapi import FastAPI, HTTPException
from pydantic import BaseModel

from .audit import (
    AuditPopulation,
    NullSatisfiedWarning,
    WithoutReplacementState,
    pps_draw,
    residual_mean,
    wr_update,
)
from .confidence import (
    ConfidenceState,
    FamilyDirection,
    FamilyGrid,
    default_mu_grid,
    lower_bound,
    upper_bound,
)
from .core import (
    Decision,
    Direction,
    DomainError,
    Fixed,
    HypothesisSpec,
    IntegratedGrid,
    ParamPolicy,
    TwoSidedProcess,
    WealthState,
    decision,
    effective_c,
    update,
)
from .events import EventLog


# ----------------------------------------------------------------- config


class PolicyConfig(BaseModel):
    kind: str                      # "fixed" | "grid"
    c: Optional[float] = None
    lo: float = 0.0
    hi: float = 1.0
    n: int = 64


class SessionConfig(BaseModel):
    direction: str                 # "upper" | "lower" | "point"
    mu: float
    alpha: float
    tau: Optional[float] = None
    policy: PolicyConfig
    track_bounds: bool = False
    population_csv: Optional[str] = None
    with_replacement: bool = True
    seed: int = 0
    idempotency_key: Optional[str] = None


class ObservationBody(BaseModel):
    x: float


def _build_policy(cfg: PolicyConfig) -> ParamPolicy:
    if cfg.kind == "fixed":
        if cfg.c is None:
            raise DomainError("fixed policy requires c")
        return Fixed(cfg.c)
    if cfg.kind == "grid":
        return IntegratedGrid.uniform(lo=cfg.lo, hi=cfg.hi, n=cfg.n)
    raise DomainError(f"unknown policy kind {cfg.kind!r}")


def _build_hypothesis(cfg: SessionConfig) -> HypothesisSpec:
    try:
        direction = Direction(cfg.direction)
    except ValueError:
        raise DomainError(f"unknown direction {cfg.direction!r}")
    return HypothesisSpec(direction=direction, mu=cfg.mu, alpha=cfg.alpha, tau=cfg.tau)


# ----------------------------------------------------------------- session


@dataclass
class Session:
    id: str
    config: SessionConfig
    hyp: HypothesisSpec
    policy: ParamPolicy
    state: WealthState = field(default_factory=WealthState)
    two_sided: Optional[TwoSidedProcess] = None
    population: Optional[AuditPopulation] = None
    wor: Optional[WithoutReplacementState] = None
    fam_lower: Optional[FamilyGrid] = None
    fam_upper: Optional[FamilyGrid] = None
    conf: Optional[ConfidenceState] = None
    pending_item: Optional[str] = None
    draw_count: int = 0
    trajectory: List[dict] = field(default_factory=list)
    lock: threading.Lock = field(default_factory=threading.Lock)

    @property
    def wealth_view(self) -> WealthState:
        return self.two_sided.combined if self.two_sided is not None else self.state

    def __deepcopy__(self, memo):
        clone = Session(id=self.id, config=self.config, hyp=self.hyp, policy=self.policy)
        for name in (
            "state", "two_sided", "population", "wor", "fam_lower", "fam_upper",
            "conf", "pending_item", "draw_count", "trajectory",
        ):
            setattr(clone, name, copy.deepcopy(getattr(self, name), memo))
        return clone


def _new_session(session_id: str, cfg: SessionConfig) -> Session:
    hyp = _build_hypothesis(cfg)
    policy = _build_policy(cfg.policy)
    sess = Session(id=session_id, config=cfg, hyp=hyp, policy=policy)
    if hyp.direction is Direction.POINT_NULL:
        sess.two_sided = TwoSidedProcess(hyp, policy)
    if cfg.population_csv:
        sess.population = AuditPopulation.from_csv(cfg.population_csv)
        if not cfg.with_replacement:
            sess.wor = WithoutReplacementState()
            if not isinstance(policy, Fixed):
                raise DomainError("without-replacement mode requires a fixed bet size")
    if cfg.track_bounds:
        tau = hyp.tau if hyp.tau is not None else 1.0
        if isinstance(policy, (Fixed, IntegratedGrid)):
            fam_policy = policy
        else:
            raise DomainError("bound tracking requires a mu-independent policy")
        grid = default_mu_grid(hi=min(1.0 - 1e-4, tau * (1.0 - 1e-6)))
        sess.fam_lower = FamilyGrid(
            direction=FamilyDirection.DECREASING, mu_grid=grid, policy=fam_policy, tau=tau
        )
        sess.fam_upper = FamilyGrid(
            direction=FamilyDirection.INCREASING, mu_grid=grid, policy=fam_policy, tau=tau
        )
        sess.conf = ConfidenceState(alpha_minus=hyp.alpha, alpha_plus=hyp.alpha)
    return sess


def _next_c(sess: Session) -> float:
    if isinstance(sess.policy, Fixed):
        return sess.policy.c
    if isinstance(sess.policy, IntegratedGrid):
        return effective_c(sess.state, sess.policy)
    return sess.policy.c_for(sess.state.observations)


def _apply_observation(sess: Session, x: float) -> None:
    """Advance all live state by one committed observation."""
    if sess.wor is not None:
        if sess.pending_item is None:
            raise DomainError("without-replacement session requires a draw before each observation")
        item = sess.population.get(sess.pending_item)
        c_k = _next_c(sess)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", NullSatisfiedWarning)
            sess.wor = wr_update(
                sess.wor, item, x, c_k, sess.population, sess.hyp.mu, sess.hyp.alpha
            )
        sess.state = sess.wor.wealth
        sess.pending_item = None
    elif sess.two_sided is not None:
        sess.two_sided.observe(x)
        sess.state = sess.two_sided.minus  # one-sided halves carry the history
        sess.pending_item = None
    else:
        sess.state = update(sess.state, x, sess.policy, sess.hyp)
        sess.pending_item = None
    if sess.fam_lower is not None:
        from .confidence import family_update

        family_update(sess.fam_lower, x)
        family_update(sess.fam_upper, x)
        sess.conf.update_bounds(
            lower_bound(sess.fam_lower, sess.conf.alpha_minus),
            upper_bound(sess.fam_upper, sess.conf.alpha_plus),
        )
    view = sess.wealth_view
    point = {
        "k": view.n,
        "wealth": view.wealth(),
        "log_wealth": view.log_wealth,
        "B_l": sess.conf.b_l_running if sess.conf else None,
        "B_u": sess.conf.b_u_running if sess.conf else None,
    }
    sess.trajectory.append(point)


def _json_safe(value):
    """Replace non-finite floats with None recursively (JSON has no inf/nan)."""
    if isinstance(value, float) and not math.isfinite(value):
        return None
    if isinstance(value, dict):
        return {k: _json_safe(v) for k, v in value.items()}
    if isinstance(value, list):
        return [_json_safe(v) for v in value]
    return value


def _summary(sess: Session) -> dict:
    view = sess.wealth_view
    dec = decision(view, sess.hyp.alpha)
    out = {
        "id": sess.id,
        "n": view.n,
        "wealth": view.wealth(),
        "e_value": view.wealth(),
        "log_wealth": view.log_wealth,
        "log_running_max": view.log_running_max,
        "running_max": math.exp(view.log_running_max),
        "decision": dec.value,
        "rejected_at": view.rejected_at,
        "absorbed": view.absorbed,
        "next_c": _next_c(sess),
        "pending_item": sess.pending_item,
    }
    if sess.conf is not None:
        out["B_l"] = sess.conf.b_l_running
        out["B_u"] = sess.conf.b_u_running
    if sess.wor is not None and sess.population.b_tot - sess.wor.spent_book > 0:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", NullSatisfiedWarning)
            m_k = residual_mean(sess.wor, sess.population, sess.hyp.mu)
        out["residual_mean"] = m_k
        out["null_satisfied"] = m_k < 0
    return _json_safe(out)


# ----------------------------------------------------------------- app


def create_app(data_dir: Optional[str] = None) -> FastAPI:
    data_dir = data_dir or os.environ.get("WEALTHTEST_DATA", "./wealthtest-data")
    log = EventLog(data_dir)
    sessions: Dict[str, Session] = {}
    registry_lock = threading.Lock()

    def _replay(session_id: str) -> Session:
        events = list(log.read(session_id))
        if not events:
            raise HTTPException(status_code=404, detail=f"no session {session_id}")
        created = events[0]
        assert created["kind"] == "created"
        sess = _new_session(session_id, SessionConfig(**created["payload"]["config"]))
        for ev in events[1:]:
            if ev["kind"] == "observation":
                _apply_observation(sess, ev["payload"]["x"])
            elif ev["kind"] == "draw":
                item = pps_draw(sess.population, ev["payload"]["u"])
                sess.pending_item = item.id
                sess.draw_count += 1
        return sess

    def _get(session_id: str) -> Session:
        with registry_lock:
            if session_id not in sessions:
                sessions[session_id] = _replay(session_id)
            return sessions[session_id]

    app = FastAPI(title="wealthtest session service")

    @app.exception_handler(DomainError)
    async def _domain_error(request, exc):
        from fastapi.responses import JSONResponse

        return JSONResponse(status_code=400, content={"detail": str(exc)})

    @app.post("/v1/sessions")
    def create_session(cfg: SessionConfig):
        if cfg.idempotency_key:
            existing = log.lookup_key(cfg.idempotency_key)
            if existing:
                return _summary(_get(existing))
        session_id = uuid.uuid4().hex[:12]
        sess = _new_session(session_id, cfg)  # validates before any persistence
        payload = {"config": cfg.model_dump()}
        log.append(session_id, "created", payload)
        if cfg.idempotency_key:
            log.register_key(cfg.idempotency_key, session_id)
        with registry_lock:
            sessions[session_id] = sess
        return _summary(sess)

    @app.post("/v1/sessions/{session_id}/observations")
    def post_observation(session_id: str, body: ObservationBody):
        sess = _get(session_id)
        with sess.lock:
            _check_item_match(sess, body.x)
            c_k = _next_c(sess)
            # validate before logging so a rejected observation leaves no event
            probe = copy.deepcopy(sess)
            _apply_observation(probe, body.x)
            log.append(
                session_id,
                "observation",
                {"x": body.x, "c_used": c_k, "item_id": sess.pending_item},
            )
            with registry_lock:
                sessions[session_id] = probe
            return _summary(probe)

    @app.post("/v1/sessions/{session_id}/preview")
    def preview(session_id: str, body: ObservationBody):
        sess = _get(session_id)
        with sess.lock:
            _check_item_match(sess, body.x)
            ghost = copy.deepcopy(sess)
            _apply_observation(ghost, body.x)
            out = _summary(ghost)
            out["preview"] = True
            return out

    @app.post("/v1/sessions/{session_id}/draw")
    def draw(session_id: str):
        sess = _get(session_id)
        with sess.lock:
            if sess.population is None:
                raise HTTPException(status_code=400, detail="session has no population")
            if sess.pending_item is not None:
                raise HTTPException(status_code=409, detail="a drawn item is already pending")
            rng = np.random.Generator(
                np.random.Philox(
                    np.random.SeedSequence(
                        entropy=sess.config.seed, spawn_key=(sess.draw_count,)
                    )
                )
            )
            drawn_ids = sess.wor.drawn_ids if sess.wor is not None else set()
            if len(drawn_ids) >= len(sess.population):
                raise HTTPException(status_code=400, detail="population exhausted")
            item = None
            for _ in range(10000):
                u = float(rng.random())
                u = u if u > 0 else 1.0
                item = pps_draw(sess.population, u)
                if item.id not in drawn_ids:
                    break
            else:
                raise HTTPException(status_code=500, detail="draw retry limit exceeded")
            log.append(session_id, "draw", {"u": u, "item_id": item.id})
            sess.pending_item = item.id
            sess.draw_count += 1
            out = {
                "item_id": item.id,
                "book_value": item.book_value,
                "u": u,
            }
            if sess.wor is not None:
                with warnings.catch_warnings():
                    warnings.simplefilter("ignore", NullSatisfiedWarning)
                    m_k = residual_mean(sess.wor, sess.population, sess.hyp.mu)
                out["residual_mean"] = m_k
                out["null_satisfied"] = m_k < 0
            return out

    @app.get("/v1/sessions/{session_id}")
    def get_session(session_id: str):
        sess = _get(session_id)
        out = _summary(sess)
        out["trajectory"] = _json_safe(sess.trajectory)
        out["hypothesis"] = {
            "direction": sess.hyp.direction.value,
            "mu": sess.hyp.mu,
            "alpha": sess.hyp.alpha,
            "tau": sess.hyp.tau,
        }
        out["policy"] = sess.config.policy.model_dump()
        return out

    @app.get("/v1/sessions/{session_id}/events")
    def get_events(session_id: str):
        events = list(log.read(session_id))
        if not events:
            raise HTTPException(status_code=404, detail=f"no session {session_id}")
        return events

    return app


def _check_item_match(sess: Session, x: float) -> None:
    """A pending PPS draw pins the next observation to the drawn item."""
    if sess.pending_item is None:
        if sess.wor is not None:
            raise DomainError("draw an item before posting an observation")
        return
    item = sess.population.get(sess.pending_item)
    if item.audited_value is not None and abs(x - item.taint) > 1e-9:
        raise DomainError(
            f"observation {x} does not match the drawn item's taint {item.taint}"
        )


def main() -> None:
    import argparse

    import uvicorn

    parser = argparse.ArgumentParser(description="run the session service")
    parser.add_argument("--host", default="127.0.0.1")
    parser.add_argument("--port", type=int, default=8000)
    parser.add_argument("--data-dir", default=None)
    args = parser.parse_args()
    uvicorn.run(create_app(args.data_dir), host=args.host, port=args.port)


if __name__ == "__main__":
    main()
