"""SQL-level cache-aside configuration rendering (proxysql.cnf format).

Only the configuration text and the DNS-swap manifests are produced here;
the SQL proxy's runtime behavior is delegated to the deployed image.
"""

from __future__ import annotations

import re
from dataclasses import dataclass


class SqlRuleError(ValueError):
    def __init__(self, rule_index: int, message: str):
        super().__init__(f"query rule {rule_index}: {message}")
        self.rule_index = rule_index


@dataclass(frozen=True)
class SqlCacheParams:
    # (regex, cache ttl in ms) per rule, applied in order
    query_rules: tuple[tuple[str, int], ...] = ()
    threads: int = 4
    max_connections: int = 2048
    cache_size_mb: int = 256

    def validate(self) -> None:
        for i, (pattern, ttl_ms) in enumerate(self.query_rules):
            try:
                re.compile(pattern)
            except re.error as exc:
                raise SqlRuleError(i, f"invalid regex {pattern!r}: {exc}") from exc
            if ttl_ms <= 0:
                raise SqlRuleError(i, "cache ttl must be positive")
        if self.threads <= 0 or self.max_connections <= 0 or self.cache_size_mb <= 0:
            raise ValueError("threads, max_connections and cache_size_mb must be positive")


def render_sql_cache_config(params: SqlCacheParams, upstream_host: str,
                            upstream_port: int = 3306) -> str:
    """Emit proxysql.cnf text: query rules with TTLs plus engine tuning."""
    params.validate()
    lines = [
        'datadir="/var/lib/proxysql"',
        "",
        "mysql_variables=",
        "{",
        f"    threads={params.threads}",
        f"    max_connections={params.max_connections}",
        f"    query_cache_size_MB={params.cache_size_mb}",
        '    interfaces="0.0.0.0:6033"',
        "}",
        "",
        "mysql_servers=",
        "(",
        "    {",
        "        address=\"%s\"" % upstream_host,
        f"        port={upstream_port}",
        "        hostgroup=0",
        "    }",
        ")",
        "",
        "mysql_query_rules=",
        "(",
    ]
    for i, (pattern, ttl_ms) in enumerate(params.query_rules):
        lines.extend([
            "    {",
            f"        rule_id={i + 1}",
            "        active=1",
            f"        match_digest=\"{pattern}\"",
            f"        cache_ttl={ttl_ms}",
            "        apply=1",
            "    }" + ("," if i + 1 < len(params.query_rules) else ""),
        ])
    lines.append(")")
    return "\n".join(lines) + "\n"
