"""Variable environment (Γ) and closure environment (Δ).

Both are ordered association lists. Updates return new objects; a key that is
already bound keeps its position and gets the new value.
"""
from dataclasses import dataclass
from typing import Iterator, Optional, Sequence, Tuple, Union

from core_erlang_semantics.ast import Expression, FunctionIdentifier, FunDef
from core_erlang_semantics.values import (
    ClosureRef,
    Concrete,
    Named,
    Value,
    VClosure,
    render_value,
)


@dataclass(frozen=True)
class Var:
    name: str

    def __str__(self):
        return self.name


EnvKey = Union[Var, FunctionIdentifier]


class ArityMismatch(ValueError):
    def __init__(self, expected: int, got: int):
        super().__init__(f"Expected {expected} values, got {got}.")
        self.expected = expected
        self.got = got


@dataclass(frozen=True)
class Environment:
    bindings: Tuple[Tuple[EnvKey, Value], ...] = ()

    def __iter__(self) -> Iterator[Tuple[EnvKey, Value]]:
        return iter(self.bindings)

    def __len__(self):
        return len(self.bindings)

    def keys(self):
        return [key for key, _ in self.bindings]


@dataclass(frozen=True)
class ClosureEnv:
    bindings: Tuple[Tuple[FunctionIdentifier, Environment], ...] = ()

    def __iter__(self) -> Iterator[Tuple[FunctionIdentifier, Environment]]:
        return iter(self.bindings)

    def __len__(self):
        return len(self.bindings)

    def keys(self):
        return [key for key, _ in self.bindings]


EMPTY_ENV = Environment()
EMPTY_CLOS = ClosureEnv()


def _replace_or_append(pairs: tuple, key, value) -> tuple:
    for i, (existing, _) in enumerate(pairs):
        if existing == key:
            return pairs[:i] + ((key, value),) + pairs[i + 1:]
    return pairs + ((key, value),)


def get_value(env: Environment, key: EnvKey) -> Optional[Value]:
    for existing, value in env.bindings:
        if existing == key:
            return value
    return None


def insert_value(env: Environment, key: EnvKey, value: Value) -> Environment:
    return Environment(_replace_or_append(env.bindings, key, value))


def add_bindings(bindings: Sequence[Tuple[str, Value]], env: Environment) -> Environment:
    for name, value in bindings:
        env = insert_value(env, Var(name), value)
    return env


def append_vars_to_env(
        vars: Sequence[str],
        vals: Sequence[Value],
        env: Environment,
    ) -> Environment:
    if len(vars) != len(vals):
        raise ArityMismatch(expected=len(vars), got=len(vals))
    return add_bindings(list(zip(vars, vals)), env)


def append_funs_to_env(
        fnames: Sequence[FunctionIdentifier],
        funs: Sequence[Union[FunDef, Tuple[Sequence[str], Expression]]],
        env: Environment,
    ) -> Environment:
    """Bind every function identifier to a closure that refers to itself by name.

    The closures never embed a concrete environment; their evaluation
    environment is looked up in Δ when they are applied.
    """
    if len(fnames) != len(funs):
        raise ArityMismatch(expected=len(fnames), got=len(funs))
    for fid, fun in zip(fnames, funs):
        params, body = (fun.params, fun.body) if isinstance(fun, FunDef) else fun
        env = insert_value(env, fid, VClosure(Named(fid), tuple(params), body))
    return env


def get_env_from_closure(fid: FunctionIdentifier, clos: ClosureEnv) -> Environment:
    for existing, env in clos.bindings:
        if existing == fid:
            return env
    return EMPTY_ENV


def get_env(ref: ClosureRef, clos: ClosureEnv) -> Environment:
    if isinstance(ref, Concrete):
        return ref.env
    if isinstance(ref, Named):
        return get_env_from_closure(ref.fid, clos)
    raise TypeError(f"Not a closure reference: {ref!r}")


def set_closure(clos: ClosureEnv, fid: FunctionIdentifier, env: Environment) -> ClosureEnv:
    return ClosureEnv(_replace_or_append(clos.bindings, fid, env))


def append_funs_to_closure(
        fnames: Sequence[FunctionIdentifier],
        clos: ClosureEnv,
        env: Environment,
    ) -> ClosureEnv:
    for fid in fnames:
        clos = set_closure(clos, fid, env)
    return clos


def render_env(env: Environment) -> str:
    return "{" + ", ".join(
        f"{key} : {render_value(value)}" for key, value in env
    ) + "}"


def render_closure_env(clos: ClosureEnv) -> str:
    return "{" + ", ".join(
        f"{fid} : {render_env(env)}" for fid, env in clos
    ) + "}"
