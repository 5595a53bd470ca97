"""Run one corpus server over stdio or SSE: ``python -m toolgate.corpus.serve``.

Gives the CLI proxy and the transport tests a real subprocess server to
talk to. Stdout is the protocol channel; diagnostics go to stderr.
"""

from __future__ import annotations

import argparse
import sys

from ..protocol.sse import DEFAULT_SSE_PORT, SseServer
from ..protocol.transport import serve_lines
from .scenarios import benign_baseline, build_scenario
from .servers import CorpusEnv
from ..detectors.findings import ThreatKind
from . import fixtures as fx


def _named_servers() -> dict[str, tuple]:
    """Servers runnable standalone, keyed by blueprint name."""
    catalog: dict[str, tuple] = {}
    for scenario in [benign_baseline(), build_scenario(ThreatKind.NAMESPACE_TYPOSQUAT),
                     build_scenario(ThreatKind.TOOL_POISONING)]:
        for key, blueprint in scenario.blueprints.items():
            catalog.setdefault(key, (blueprint.namespace, blueprint.build))
    return catalog


def main(argv: list[str] | None = None) -> int:
    catalog = _named_servers()
    parser = argparse.ArgumentParser(
        prog="toolgate-corpus-server",
        description="Serve one scripted corpus server over stdio or SSE.",
    )
    parser.add_argument("server", choices=sorted(catalog), help="corpus server to run")
    parser.add_argument("--transport", choices=["stdio", "sse"], default="stdio")
    parser.add_argument("--port", type=int, default=DEFAULT_SSE_PORT)
    args = parser.parse_args(argv)

    env = CorpusEnv(fs=fx.default_filesystem())
    _, build = catalog[args.server]
    _manifest, server = build(env)

    if args.transport == "sse":
        sse = SseServer(server.handle, port=args.port).start()
        print(f"serving {args.server} at {sse.base_url}/sse", file=sys.stderr)
        try:
            sse._thread.join()
        except KeyboardInterrupt:
            sse.stop()
        return 0

    serve_lines(lambda m: server.handle(m), sys.stdin.buffer, sys.stdout.buffer)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
