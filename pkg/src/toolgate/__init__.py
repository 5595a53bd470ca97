"""toolgate: a protocol-aware security gateway for MCP hosts and servers.

The gateway sits between an MCP host and its servers. It vets servers at
admission (identity, integrity, metadata), namespaces their tools,
intercepts every call (argument, sandbox-policy, and chaining checks),
manages short-lived sessions, and writes a hash-chained audit log. A
bundled threat corpus replays known attack mechanics through the gateway
and reports a detection matrix.
"""

__version__ = "0.1.0"
