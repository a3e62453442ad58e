"""
Program elaboration
Inlines procedures with local scoping and resolves rule names into a CoreProgram
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import count
from typing import Mapping

from gp_syntax import (
    Break,
    Choice,
    FailCmd,
    If,
    Loop,
    MainDecl,
    ProcCall,
    ProcDecl,
    RuleDecl,
    RuleSetCall,
    Seq,
    Skip,
    Try,
)


class StaticError(Exception):
    """Program is well-formed text but cannot be elaborated"""

    def __init__(self, message, line=None, column=None, path=None):
        super().__init__(message)
        self.message = message
        self.line = line
        self.column = column
        self.path = path

    def __str__(self):
        return f"{self.path or '<program>'}:{self.line or 0}:{self.column or 0}: {self.message}"


class RecursiveProcedure(StaticError):
    pass


class UnknownRule(StaticError):
    pass


class BreakOutsideLoop(StaticError):
    pass


# Core commands compare by identity: the interpreter memoises on node identity.


@dataclass(frozen=True, eq=False)
class CRuleSet:
    rules: tuple

    @property
    def names(self):
        return tuple(r.name for r in self.rules)


@dataclass(frozen=True, eq=False)
class CSeq:
    commands: tuple


@dataclass(frozen=True, eq=False)
class CIf:
    condition: object
    then: object
    else_: object


@dataclass(frozen=True, eq=False)
class CTry:
    condition: object
    then: object
    else_: object


@dataclass(frozen=True, eq=False)
class CLoop:
    body: object
    loop_id: int


@dataclass(frozen=True, eq=False)
class COr:
    left: object
    right: object


@dataclass(frozen=True, eq=False)
class CBreak:
    loop_id: int


@dataclass(frozen=True, eq=False)
class CSkip:
    pass


@dataclass(frozen=True, eq=False)
class CFail:
    pass


@dataclass(frozen=True)
class CoreProgram:
    """Main with every procedure call inlined; rules maps top-level rule names to Rule values"""

    body: object
    rules: Mapping = field(default_factory=dict)


def _scope(decls, outer):
    """Scope chain with one more declaration level in front"""
    level = {}
    for decl in decls:
        if isinstance(decl, MainDecl):
            continue
        level[decl.name] = decl
    return (level, *outer)


def _lookup(name, scopes):
    for level in scopes:
        if name in level:
            return level[name]
    return None


class _Elaborator:
    def __init__(self, path=None):
        self.path = path
        self.loop_ids = count(1)
        self.defining_scopes = {}

    def fail(self, cls, message, decl):
        raise cls(message, getattr(decl, "line", None), getattr(decl, "column", None), self.path)

    def command(self, cmd, scopes, stack, loop, decl):
        """
        Args:
            scopes: lexical scopes, innermost first
            stack: procedures being inlined, for recursion detection
            loop: id of the innermost enclosing loop within the current condition scope, or None
            decl: declaration being elaborated, for error positions
        """
        if isinstance(cmd, RuleSetCall):
            rules = []
            for name in cmd.names:
                found = _lookup(name, scopes)
                if not isinstance(found, RuleDecl):
                    self.fail(UnknownRule, f"{name} is not a declared rule", decl)
                rules.append(found.rule)
            return CRuleSet(tuple(rules))
        if isinstance(cmd, ProcCall):
            found = _lookup(cmd.name, scopes)
            if found is None:
                self.fail(UnknownRule, f"{cmd.name} is not a declared rule or procedure", decl)
            if isinstance(found, RuleDecl):
                return CRuleSet((found.rule,))
            return self.procedure(found, stack, loop)
        if isinstance(cmd, Seq):
            return CSeq(tuple(self.command(c, scopes, stack, loop, decl) for c in cmd.commands))
        if isinstance(cmd, (If, Try)):
            # a condition runs on its own; break may not leave it
            condition = self.command(cmd.condition, scopes, stack, None, decl)
            then = CSkip() if cmd.then is None else self.command(cmd.then, scopes, stack, loop, decl)
            else_ = CSkip() if cmd.else_ is None else self.command(cmd.else_, scopes, stack, loop, decl)
            return (CIf if isinstance(cmd, If) else CTry)(condition, then, else_)
        if isinstance(cmd, Loop):
            loop_id = next(self.loop_ids)
            return CLoop(self.command(cmd.body, scopes, stack, loop_id, decl), loop_id)
        if isinstance(cmd, Choice):
            return COr(
                self.command(cmd.left, scopes, stack, loop, decl),
                self.command(cmd.right, scopes, stack, loop, decl),
            )
        if isinstance(cmd, Break):
            if loop is None:
                self.fail(BreakOutsideLoop, "break is not inside a loop", decl)
            return CBreak(loop)
        if isinstance(cmd, Skip):
            return CSkip()
        if isinstance(cmd, FailCmd):
            return CFail()
        raise TypeError(f"not a command: {cmd!r}")

    def procedure(self, proc, stack, loop):
        if any(p is proc for p in stack):
            chain = " -> ".join([p.name for p in stack] + [proc.name])
            self.fail(RecursiveProcedure, f"procedure {proc.name} is recursive ({chain})", proc)
        defining = self.defining_scopes[id(proc)]
        inner = _scope(proc.locals, defining)
        self.register(proc.locals, inner)
        return self.command(proc.body, inner, (*stack, proc), loop, proc)

    def register(self, decls, scopes):
        for decl in decls:
            if isinstance(decl, ProcDecl):
                self.defining_scopes[id(decl)] = scopes

    def check_all(self, decls):
        """Elaborate every procedure once on its own so unused ones are checked too"""
        for decl in decls:
            if isinstance(decl, ProcDecl):
                # loop 0: the caller decides whether a break in the body is inside a loop
                self.procedure(decl, (), 0)
                self.check_all(decl.locals)


def elaborate(program, path=None):
    """
    Inline procedures and resolve rule names

    Args:
        program: ProgramAST from parse_program
        path: program file name used in error messages

    Returns:
        CoreProgram with no procedure calls left
    """
    elaborator = _Elaborator(path)
    top = _scope(program.declarations, ())
    elaborator.register(program.declarations, top)
    elaborator.check_all(program.declarations)

    main = program.main
    body = elaborator.command(main.body, top, (), None, main)
    return CoreProgram(body, program.rules)
