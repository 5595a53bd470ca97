"""Operator entry points: scan, proxy, pin, verify, corpus.

Exit codes are stable for CI use: 0 clean, 1 warn-level findings only,
2 block-level findings (or unmet corpus expectations), 3 usage or config
error, 4 internal error.
"""

from __future__ import annotations

import argparse
import json
import shlex
import signal
import sys
from pathlib import Path
from typing import Any, Sequence

from . import __version__
from .corpus.runner import run_all, run_scenario
from .corpus.scenarios import build_scenario
from .detectors import (
    Finding,
    Severity,
    ThreatKind,
    check_config_drift,
    default_lexicon,
    detect_description_injection,
    detect_preference_manipulation,
    detect_typosquat,
    scan_config_credentials,
    sort_findings,
)
from .gateway.core import Gateway
from .gateway.frontend import serve_gateway_stdio
from .gateway.policy import PolicyConfig, PolicyError
from .protocol.client import HandshakeError, McpClient
from .protocol.sse import sse_connect
from .protocol.transport import StdioProcessChannel, TransportError
from .registry.manifest import (
    ManifestError,
    Registry,
    ServerManifest,
    check_advisories,
    load_advisories,
    load_manifest,
)
from .registry.pins import PinStore, pin_tools
from .registry.verify import TriState, UnknownPublisherKey, verify_package

EXIT_CLEAN = 0
EXIT_WARN = 1
EXIT_BLOCK = 2
EXIT_USAGE = 3
EXIT_INTERNAL = 4


def _exit_code_for(findings: Sequence[Finding]) -> int:
    worst = EXIT_CLEAN
    for f in findings:
        if f.severity is Severity.BLOCK:
            return EXIT_BLOCK
        if f.severity is Severity.WARN:
            worst = EXIT_WARN
    return worst


def _load_policy(path: str | None) -> PolicyConfig:
    return PolicyConfig.load(path) if path else PolicyConfig()


def _print_findings(findings: Sequence[Finding], fmt: str, extra: dict[str, Any] | None = None) -> None:
    if fmt == "json":
        obj: dict[str, Any] = {"findings": [f.to_json_obj() for f in findings]}
        obj.update(extra or {})
        sys.stdout.write(json.dumps(obj, sort_keys=True, separators=(",", ":")) + "\n")
        return
    if not findings:
        print("clean: no findings")
    for f in findings:
        print(f"[{f.severity.value:5s}] {f.kind.value:26s} {f.location}  ({f.rule_id})  {f.evidence}")


def _looks_like_manifest(obj: Any) -> bool:
    return isinstance(obj, dict) and "namespace" in obj and "tools" in obj


def cmd_scan(args: argparse.Namespace) -> int:
    try:
        policy = _load_policy(args.policy)
    except PolicyError as exc:
        print(f"policy error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    lexicon = default_lexicon()
    registry = Registry.load(policy.registry_path) if policy.registry_path else Registry()
    advisories = load_advisories(policy.advisory_path) if policy.advisory_path else []
    baseline = None
    if policy.baseline_config_path:
        baseline = json.loads(Path(policy.baseline_config_path).read_text(encoding="utf-8"))

    findings: list[Finding] = []
    for path in args.paths:
        p = Path(path)
        try:
            text = p.read_text(encoding="utf-8")
        except OSError as exc:
            print(f"cannot read {path}: {exc}", file=sys.stderr)
            return EXIT_USAGE
        try:
            parsed = json.loads(text)
        except json.JSONDecodeError:
            parsed = None
        if _looks_like_manifest(parsed):
            try:
                manifest = load_manifest(p)
            except ManifestError as exc:
                print(f"malformed manifest {path}: {exc}", file=sys.stderr)
                return EXIT_USAGE
            findings += detect_typosquat(
                manifest.namespace, registry.entries, threshold=policy.typosquat_threshold
            )
            findings += check_advisories(manifest, advisories)
            for tool in manifest.tools:
                findings += detect_description_injection(tool, lexicon)
                findings += detect_preference_manipulation(tool, lexicon)
        else:
            findings += scan_config_credentials(text, lexicon)
            if baseline is not None and parsed is not None:
                findings += check_config_drift(baseline, parsed)
    findings = sort_findings(policy.effective(findings))
    _print_findings(findings, args.format)
    return _exit_code_for(findings)


def cmd_pin(args: argparse.Namespace) -> int:
    try:
        policy = _load_policy(args.policy)
        manifest = load_manifest(args.manifest)
    except (PolicyError, ManifestError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if args.namespace != manifest.namespace:
        print(
            f"error: manifest namespace {manifest.namespace!r} does not match {args.namespace!r}",
            file=sys.stderr,
        )
        return EXIT_USAGE
    store = PinStore(policy.pin_store_path)
    import time

    written = pin_tools(
        store, manifest.namespace, manifest.tools, server_version=manifest.version, now=int(time.time())
    )
    print(f"pinned {len(written)} new tool definition(s) for {manifest.namespace}")
    return EXIT_CLEAN


def cmd_verify(args: argparse.Namespace) -> int:
    try:
        manifest = load_manifest(args.manifest)
        package = Path(args.package).read_bytes()
    except (ManifestError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    registry = Registry.load(args.registry) if args.registry else Registry()
    try:
        report = verify_package(manifest, package, registry)
    except UnknownPublisherKey as exc:
        print(f"verification failed: {exc}", file=sys.stderr)
        return EXIT_BLOCK
    payload = {
        "package_source": manifest.namespace,
        "display_name": manifest.display_name,
        "version": manifest.version,
        "checksum": report.checksum_ok.value,
        "digital_signature": report.signature_ok.value,
        "publisher_key_id": manifest.publisher_key_id or "",
    }
    if args.format == "json":
        sys.stdout.write(json.dumps(payload, sort_keys=True, separators=(",", ":")) + "\n")
    else:
        print(f"package source:    {payload['package_source']} ({payload['display_name']})")
        print(f"version:           {payload['version']}")
        print(f"checksum:          {payload['checksum']}")
        print(f"digital signature: {payload['digital_signature']}")
        if payload["publisher_key_id"]:
            print(f"publisher key id:  {payload['publisher_key_id']}")
    if report.failed():
        return EXIT_BLOCK
    if report.incomplete():
        return EXIT_BLOCK if args.strict else EXIT_WARN
    return EXIT_CLEAN


def _parse_server_spec(spec: str) -> tuple[str, str]:
    name, sep, rest = spec.partition("=")
    if not sep or not name or not rest:
        raise ValueError(f"server spec must be name=command or name=url: {spec!r}")
    return name, rest


def _connect_backend(target: str) -> McpClient:
    if target.startswith(("http://", "https://")):
        client = McpClient(sse_connect(target))
    else:
        client = McpClient(StdioProcessChannel(shlex.split(target)))
    client.initialize()
    return client


def _manifest_from_live(namespace: str, client: McpClient) -> ServerManifest:
    info = client.server_info
    caps = client.capabilities
    tools = client.list_tools()
    return ServerManifest(
        namespace=namespace,
        display_name=info.name if info else namespace,
        version=(info.version if info and info.version else "0"),
        protocol_version=caps.protocol_version if caps else "",
        tools=tuple(tools),
    )


def cmd_proxy(args: argparse.Namespace) -> int:
    try:
        policy = _load_policy(args.policy)
        specs = [_parse_server_spec(s) for s in args.server]
    except (PolicyError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    gateway = Gateway(policy)
    admitted = 0
    for name, target in specs:
        try:
            client = _connect_backend(target)
        except (TransportError, HandshakeError, OSError) as exc:
            print(f"cannot connect {name}: {exc}", file=sys.stderr)
            continue
        try:
            manifest = _manifest_from_live(name, client)
        except ManifestError as exc:
            print(f"{name}: invalid identity: {exc}", file=sys.stderr)
            client.close()
            continue
        decision = gateway.admit_server(manifest, client=client)
        if decision.accepted:
            admitted += 1
            print(f"admitted {name} ({len(decision.qualified_tools)} tools)", file=sys.stderr)
        else:
            kinds = ", ".join(sorted({f.kind.value for f in decision.blocking()}))
            print(f"rejected {name}: {kinds}", file=sys.stderr)
            client.close()
    if specs and admitted == 0:
        print("no servers admitted; refusing to start", file=sys.stderr)
        return EXIT_USAGE

    def _terminate(signum: int, frame: Any) -> None:
        raise SystemExit(EXIT_CLEAN)

    signal.signal(signal.SIGTERM, _terminate)
    try:
        serve_gateway_stdio(gateway, sys.stdin.buffer, sys.stdout.buffer)
    except SystemExit:
        pass
    return EXIT_CLEAN


def cmd_corpus(args: argparse.Namespace) -> int:
    with_gateway = not args.no_gateway
    try:
        if args.kind:
            try:
                kind = ThreatKind(args.kind.strip().upper())
            except ValueError:
                print(f"unknown threat kind: {args.kind}", file=sys.stderr)
                return EXIT_USAGE
            scenario = build_scenario(kind)
            outcome = run_scenario(scenario, with_gateway)
            if args.format == "json":
                obj = {
                    "kind": kind.value,
                    "with_gateway": with_gateway,
                    "found_kinds": sorted(k.value for k in outcome.found_kinds()),
                    "blocked": outcome.blocked,
                    "exfiltration_observed": outcome.exfiltration_observed,
                    "harm_observed": outcome.harm_observed,
                    "audit_ok": outcome.audit_ok,
                    "passed": outcome.passed,
                }
                sys.stdout.write(json.dumps(obj, sort_keys=True, separators=(",", ":")) + "\n")
            else:
                state = "PASS" if outcome.passed else "FAIL"
                print(
                    f"{kind.value}: {state} (blocked={outcome.blocked}, "
                    f"exfil={outcome.exfiltration_observed}, harm={outcome.harm_observed})"
                )
            return EXIT_CLEAN if outcome.passed else EXIT_BLOCK
        matrix = run_all(with_gateway)
        if args.format == "json":
            sys.stdout.write(matrix.to_json())
        else:
            print(matrix.render_text())
        return EXIT_CLEAN if matrix.all_passed() else EXIT_BLOCK
    except Exception as exc:  # noqa: BLE001 - harness failure is exit 4
        print(f"corpus harness failure: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="toolgate",
        description="Security gateway and static scanner for MCP servers.",
    )
    parser.add_argument("--version", action="version", version=f"toolgate {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    scan = sub.add_parser("scan", help="statically scan manifests and config files")
    scan.add_argument("paths", nargs="+", help="manifest or config files")
    scan.add_argument("--policy", help="policy JSON file")
    scan.add_argument("--format", choices=["text", "json"], default="text")
    scan.set_defaults(fn=cmd_scan)

    proxy = sub.add_parser("proxy", help="run the gateway: stdio upstream, managed servers downstream")
    proxy.add_argument("--policy", help="policy JSON file")
    proxy.add_argument(
        "--server",
        action="append",
        default=[],
        metavar="NAME=TARGET",
        help="downstream server: name=command (stdio) or name=url (SSE); repeatable",
    )
    proxy.set_defaults(fn=cmd_proxy)

    pin = sub.add_parser("pin", help="record first-seen tool definition hashes")
    pin.add_argument("namespace")
    pin.add_argument("manifest")
    pin.add_argument("--policy", help="policy JSON file")
    pin.set_defaults(fn=cmd_pin)

    verify = sub.add_parser("verify", help="verify package checksum and signature against a manifest")
    verify.add_argument("manifest")
    verify.add_argument("package")
    verify.add_argument("--registry", help="registry JSON file with publisher keys")
    verify.add_argument("--strict", action="store_true", help="treat absent integrity metadata as a failure")
    verify.add_argument("--format", choices=["text", "json"], default="text")
    verify.set_defaults(fn=cmd_verify)

    corpus = sub.add_parser("corpus", help="replay the threat corpus and print the detection matrix")
    corpus.add_argument("--kind", help="run a single threat kind (e.g. rug_pull)")
    gate = corpus.add_mutually_exclusive_group()
    gate.add_argument("--with-gateway", dest="no_gateway", action="store_false", default=False)
    gate.add_argument("--no-gateway", dest="no_gateway", action="store_true")
    corpus.add_argument("--format", choices=["text", "json"], default="text")
    corpus.set_defaults(fn=cmd_corpus)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except BrokenPipeError:  # downstream host went away; not our failure
        return EXIT_CLEAN
    except Exception as exc:  # noqa: BLE001 - last-resort internal error
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    raise SystemExit(main())
