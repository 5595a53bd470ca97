"""Scenario execution and the 16-row detection matrix.

Every scenario runs twice in a full evaluation: once with the gateway in
front (detection and containment must hold) and once without it (the
attack must demonstrably succeed — the corpus proves the threats are real
before proving the defenses). Runs are deterministic: virtual clock,
seeded RNG, synthetic fixtures; repeated runs produce byte-identical
machine-readable matrices.
"""

from __future__ import annotations

import json
import tempfile
import zlib
from dataclasses import dataclass
from pathlib import Path
from random import Random

from ..detectors.findings import Finding, Severity, ThreatKind
from ..gateway.audit import verify_audit
from ..gateway.core import Gateway
from ..gateway.policy import PolicyConfig
from ..gateway.sessions import VirtualClock
from ..protocol.client import McpClient
from ..protocol.sse import SseServer, sse_connect
from ..protocol.transport import LoopbackChannel
from ..registry.manifest import Registry
from .host import GatewayHost, NaiveHost, Trace
from .scenarios import (
    Action,
    AdmitServer,
    AdvanceClock,
    Call,
    CheckDrift,
    CreateSession,
    InstallAndAdmit,
    ListTools,
    ReplayCall,
    RevokeSession,
    ScanConfig,
    Scenario,
    ScenarioSetupError,
    ServerBlueprint,
    UpdateServer,
    all_kinds,
    benign_baseline,
    build_scenario,
)
from .servers import CorpusEnv
from . import fixtures as fx


@dataclass
class ScenarioOutcome:
    kind: ThreatKind | None
    with_gateway: bool
    findings: list[Finding]
    blocked: bool
    exfiltration_observed: bool
    harm_observed: bool
    audit_ok: bool
    passed: bool
    trace: Trace
    env: CorpusEnv

    def found_kinds(self) -> frozenset[ThreatKind]:
        return frozenset(f.kind for f in self.findings)


class _Run:
    """One scenario execution: owns transports and cleans them up."""

    def __init__(self, scenario: Scenario, with_gateway: bool, state_dir: str):
        self.scenario = scenario
        self.with_gateway = with_gateway
        seed = zlib.crc32(scenario.title.encode("utf-8"))
        self.env = CorpusEnv(clock=VirtualClock(), rng=Random(seed), fs=fx.default_filesystem())
        if scenario.env_setup is not None:
            scenario.env_setup(self.env)
        self.sse_servers: list[SseServer] = []
        self.clients: list[McpClient] = []
        self.gateway: Gateway | None = None
        if with_gateway:
            policy = PolicyConfig(
                state_dir=state_dir,
                workspace_root=scenario.workspace_root,
                mode_overrides=dict(scenario.mode_overrides),
            )
            self.gateway = Gateway(
                policy,
                clock=self.env.clock,
                rng=self.env.rng,
                registry=Registry(list(scenario.registry_entries)),
                advisories=list(scenario.advisories),
            )
            self.host: GatewayHost | NaiveHost = GatewayHost(self.env, self.gateway)
        else:
            self.host = NaiveHost(self.env)

    # -- transports -----------------------------------------------------

    def _start_sse(self, blueprint: ServerBlueprint, server) -> SseServer:
        rng = self.env.rng
        sse = SseServer(
            server.handle,
            port=0,
            session_id_factory=lambda: f"{rng.getrandbits(128):032x}",
        ).start()
        self.sse_servers.append(sse)
        return sse

    def _connect(self, blueprint: ServerBlueprint, server) -> McpClient:
        if blueprint.transport == "sse":
            sse = self._start_sse(blueprint, server)
            client = McpClient(sse_connect(sse.base_url))
        else:
            client = McpClient(LoopbackChannel(server.handle))
        client.initialize()
        self.clients.append(client)
        return client

    # -- actions ---------------------------------------------------------

    def execute(self, action: Action) -> None:
        scenario, host, env = self.scenario, self.host, self.env
        if isinstance(action, (AdmitServer, InstallAndAdmit, UpdateServer)):
            blueprint = scenario.blueprints[action.server]
            manifest, server = blueprint.build(env)
            package = blueprint.package(env) if blueprint.package is not None else None
            if isinstance(host, GatewayHost):
                client = self._connect(blueprint, server)
                if isinstance(action, UpdateServer):
                    host.update(blueprint.key, manifest, client, package=package)
                else:
                    host.admit(blueprint.key, manifest, client, package=package)
            else:
                if isinstance(action, InstallAndAdmit) and package is not None:
                    host.install(blueprint.key, package)
                if blueprint.transport == "sse":
                    sse = self._start_sse(blueprint, server)
                    host.sse_base_url = sse.base_url
                    host.trace.admissions.append((blueprint.key, True))
                elif isinstance(action, UpdateServer):
                    client = self._connect(blueprint, server)
                    host.update(blueprint.key, blueprint.namespace, server, client)
                else:
                    client = self._connect(blueprint, server)
                    host.admit(blueprint.key, blueprint.namespace, server, client)
        elif isinstance(action, CreateSession):
            host.create_session(action.alias, action.client_id)
        elif isinstance(action, RevokeSession):
            host.revoke_session(action.alias)
        elif isinstance(action, ListTools):
            host.list_tools(action.session)
        elif isinstance(action, Call):
            host.call(action.session, action.tool, dict(action.args), action.namespace, action.select)
        elif isinstance(action, ReplayCall):
            if isinstance(host, NaiveHost) and action.session in host.sse_clients:
                host.replay_raw_sse(action.session, action.tool, dict(action.args))
            else:
                host.call(action.session, action.tool, dict(action.args), replay=True)
        elif isinstance(action, AdvanceClock):
            env.clock.advance(action.seconds)
        elif isinstance(action, ScanConfig):
            host.scan_config(action.config)
        elif isinstance(action, CheckDrift):
            host.check_drift()
        else:  # pragma: no cover - closed action union
            raise ScenarioSetupError(f"unknown action {action!r}")

    def close(self) -> None:
        for client in self.clients:
            try:
                client.close()
            except Exception:  # noqa: BLE001 - teardown is best effort
                pass
        if isinstance(self.host, NaiveHost):
            for channel, _client in self.host.sse_clients.values():
                try:
                    channel.close()
                except Exception:  # noqa: BLE001
                    pass
        for sse in self.sse_servers:
            sse.stop()

    # -- outcome ----------------------------------------------------------

    def _audit_findings(self) -> list[Finding]:
        assert self.gateway is not None
        path = Path(self.gateway.policy.audit_log_path)
        if not path.exists():
            return []
        findings = []
        for line in path.read_text(encoding="utf-8").splitlines():
            if not line.strip():
                continue
            obj = json.loads(line)
            if obj.get("event_kind") != "Finding":
                continue
            d = obj["detail"]
            findings.append(
                Finding(
                    kind=ThreatKind(d["kind"]),
                    severity=Severity(d["severity"]),
                    evidence=d["evidence"],
                    location=d["location"],
                    rule_id=d["rule_id"],
                )
            )
        return findings

    def _exfiltration_observed(self) -> bool:
        return any(self.env.captured(marker) for marker in self.scenario.markers)

    def outcome(self) -> ScenarioOutcome:
        scenario = self.scenario
        exfil = self._exfiltration_observed()
        harm = exfil or (
            scenario.harm_check is not None and scenario.harm_check(self.host.trace, self.env)
        )
        if self.with_gateway:
            assert self.gateway is not None
            findings = self._audit_findings()
            blocked = self.host.trace.blocked_any()
            audit_ok = verify_audit(self.gateway.policy.audit_log_path).ok
            found = {f.kind for f in findings}
            passed = (
                scenario.expectations.expected_kinds <= found
                and blocked == scenario.expectations.must_block
                and not exfil
                and not harm
                and audit_ok
            )
        else:
            findings = []
            blocked = False
            audit_ok = True
            passed = harm if scenario.expectations.must_block else True
        return ScenarioOutcome(
            kind=scenario.kind,
            with_gateway=self.with_gateway,
            findings=findings,
            blocked=blocked,
            exfiltration_observed=exfil,
            harm_observed=harm,
            audit_ok=audit_ok,
            passed=passed,
            trace=self.host.trace,
            env=self.env,
        )


def run_scenario(scenario: Scenario, with_gateway: bool, state_dir: str | None = None) -> ScenarioOutcome:
    """Execute one scenario script over in-memory/loopback transports."""
    if state_dir is not None:
        run = _Run(scenario, with_gateway, state_dir)
        try:
            for action in scenario.script:
                run.execute(action)
        finally:
            run.close()
        return run.outcome()
    with tempfile.TemporaryDirectory(prefix="toolgate-corpus-") as tmp:
        return run_scenario(scenario, with_gateway, state_dir=tmp)


def run_benign_baseline(with_gateway: bool = True) -> ScenarioOutcome:
    return run_scenario(benign_baseline(), with_gateway)


@dataclass(frozen=True)
class MatrixRow:
    kind: str
    expected_kinds: tuple[str, ...]
    found_kinds: tuple[str, ...]
    must_block: bool
    blocked: bool
    exfiltration_observed: bool
    harm_observed: bool
    audit_ok: bool
    passed: bool


@dataclass(frozen=True)
class DetectionMatrix:
    with_gateway: bool
    rows: tuple[MatrixRow, ...]

    def all_passed(self) -> bool:
        return all(row.passed for row in self.rows)

    def to_obj(self) -> dict:
        return {
            "with_gateway": self.with_gateway,
            "rows": [
                {
                    "kind": r.kind,
                    "expected_kinds": list(r.expected_kinds),
                    "found_kinds": list(r.found_kinds),
                    "must_block": r.must_block,
                    "blocked": r.blocked,
                    "exfiltration_observed": r.exfiltration_observed,
                    "harm_observed": r.harm_observed,
                    "audit_ok": r.audit_ok,
                    "passed": r.passed,
                }
                for r in self.rows
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_obj(), sort_keys=True, separators=(",", ":")) + "\n"

    def render_text(self) -> str:
        headers = ["kind", "found", "blocked", "exfil", "harm", "audit", "pass"]
        lines = []
        for r in self.rows:
            lines.append(
                [
                    r.kind,
                    ",".join(r.found_kinds) or "-",
                    "yes" if r.blocked else "no",
                    "yes" if r.exfiltration_observed else "no",
                    "yes" if r.harm_observed else "no",
                    "ok" if r.audit_ok else "BROKEN",
                    "PASS" if r.passed else "FAIL",
                ]
            )
        widths = [max(len(h), *(len(row[i]) for row in lines)) for i, h in enumerate(headers)]
        out = ["  ".join(h.ljust(widths[i]) for i, h in enumerate(headers))]
        out.append("  ".join("-" * w for w in widths))
        out += ["  ".join(cell.ljust(widths[i]) for i, cell in enumerate(row)) for row in lines]
        mode = "with gateway" if self.with_gateway else "no gateway"
        out.append(f"{sum(r.passed for r in self.rows)}/{len(self.rows)} rows passed ({mode})")
        return "\n".join(out)


def run_all(with_gateway: bool) -> DetectionMatrix:
    """Run every taxonomy scenario in fixed order."""
    rows = []
    for kind in all_kinds():
        scenario = build_scenario(kind)
        outcome = run_scenario(scenario, with_gateway)
        rows.append(
            MatrixRow(
                kind=kind.value,
                expected_kinds=tuple(sorted(k.value for k in scenario.expectations.expected_kinds)),
                found_kinds=tuple(sorted(k.value for k in outcome.found_kinds())),
                must_block=scenario.expectations.must_block,
                blocked=outcome.blocked,
                exfiltration_observed=outcome.exfiltration_observed,
                harm_observed=outcome.harm_observed,
                audit_ok=outcome.audit_ok,
                passed=outcome.passed,
            )
        )
    return DetectionMatrix(with_gateway=with_gateway, rows=tuple(rows))
