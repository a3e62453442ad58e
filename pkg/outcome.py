"""
Execution outcomes
Success(graph) | Fail | Diverge | Crash, shared by the rule engine and the interpreter
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Optional

from host_graph import HostGraph


@dataclass(frozen=True, eq=False)
class Success:
    graph: HostGraph
    # (rule, match) of the application that produced graph, for single rule-set calls
    step: Optional[Any] = None
    kind = "success"


@dataclass(frozen=True)
class Fail:
    kind = "fail"


@dataclass(frozen=True)
class Diverge:
    """The fuel budget ran out before the program finished"""

    kind = "diverge"


@dataclass(frozen=True)
class Crash:
    """Runtime error (overflow, division by zero, type mismatch); never a Fail"""

    message: str = ""
    kind = "crash"


FAIL = Fail()
DIVERGE = Diverge()
