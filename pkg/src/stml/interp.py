"""Reference interpreter for the C subset.

Numeric model: float and double are IEEE 754 binary64; int is a wrapping
64-bit signed integer with C-style truncating division and remainder.
Comparisons and logical operators yield int 0/1 and short-circuit.

An optional trace callback observes every variable access as
trace(mode, name, indices) with mode "r" or "w" and indices () for scalars;
the dynamic analyses in the test suite are built on it.
"""

from __future__ import annotations

from typing import Callable, Optional

import numpy as np

from .cast import AnnotatedAst, Node
from .errors import (
    OutOfBounds,
    StepBudgetExceeded,
    UnboundVariable,
    UnsupportedFeature,
)

_I64_MASK = (1 << 64) - 1


def _wrap(x: int) -> int:
    return ((int(x) + (1 << 63)) & _I64_MASK) - (1 << 63)


def _c_div(a: int, b: int) -> int:
    q = abs(a) // abs(b)
    return q if (a < 0) == (b < 0) else -q


def _c_mod(a: int, b: int) -> int:
    return a - _c_div(a, b) * b


class _Interp:
    def __init__(self, step_budget: int, trace: Optional[Callable]):
        self.env: dict[str, object] = {}
        self.types: dict[str, str] = {}
        self.budget = step_budget
        self.trace = trace

    def tick(self) -> None:
        self.budget -= 1
        if self.budget < 0:
            raise StepBudgetExceeded("step budget exceeded")

    # -- values ---------------------------------------------------------------

    def load(self, name: str) -> object:
        if name not in self.env:
            raise UnboundVariable(name)
        return self.env[name]

    def coerce(self, name: str, value):
        ctype = self.types.get(name)
        if ctype == "int":
            return _wrap(int(value))
        if ctype in ("float", "double"):
            return float(value)
        return _wrap(value) if isinstance(value, int) else value

    def read_scalar(self, name: str):
        v = self.load(name)
        if isinstance(v, np.ndarray):
            raise UnsupportedFeature(f"whole-array use of {name}")
        if self.trace:
            self.trace("r", name, ())
        return v

    def write_scalar(self, name: str, value) -> None:
        if self.trace:
            self.trace("w", name, ())
        self.env[name] = self.coerce(name, value)

    def index_of(self, node: Node) -> tuple[str, tuple[int, ...]]:
        idxs: list[int] = []
        base = node
        while base.kind == "Index":
            idxs.append(self.int_index(base.children[1]))
            base = base.children[0]
        idxs.reverse()
        return base.name, tuple(idxs)

    def int_index(self, node: Node) -> int:
        v = self.expr(node)
        if isinstance(v, float):
            raise OutOfBounds("array index must be an integer")
        return v

    def array_cell(self, name: str, idxs: tuple[int, ...]) -> tuple:
        arr = self.load(name)
        if not isinstance(arr, np.ndarray):
            raise OutOfBounds(f"{name} is not an array")
        if len(idxs) != arr.ndim:
            raise OutOfBounds(
                f"{name} has rank {arr.ndim}, accessed with {len(idxs)} indices"
            )
        for i, dim in zip(idxs, arr.shape):
            if i < 0 or i >= dim:
                raise OutOfBounds(
                    f"{name}[{','.join(str(k) for k in idxs)}] out of bounds "
                    f"for shape {arr.shape}"
                )
        return arr, idxs

    def read_cell(self, node: Node):
        name, idxs = self.index_of(node)
        arr, idxs = self.array_cell(name, idxs)
        if self.trace:
            self.trace("r", name, idxs)
        v = arr[idxs]
        return int(v) if arr.dtype == np.int64 else float(v)

    def write_cell(self, node: Node, value) -> None:
        name, idxs = self.index_of(node)
        arr, idxs = self.array_cell(name, idxs)
        if self.trace:
            self.trace("w", name, idxs)
        if arr.dtype == np.int64:
            arr[idxs] = _wrap(int(value))
        else:
            arr[idxs] = float(value)

    # -- expressions ------------------------------------------------------------

    def expr(self, node: Node):
        k = node.kind
        if k == "IntLit":
            return _wrap(node.value)
        if k == "FloatLit":
            return node.value
        if k == "Var":
            return self.read_scalar(node.name)
        if k == "Index":
            return self.read_cell(node)
        if k == "BinOp":
            return self.binop(node)
        if k == "UnaryOp":
            return self.unary(node)
        if k == "Call":
            raise UnsupportedFeature(
                f"call to {node.name} cannot be evaluated"
            )
        raise UnsupportedFeature(f"cannot evaluate {k}")

    def binop(self, node: Node):
        op = node.op
        if op == "&&":
            return 1 if self.expr(node.children[0]) and self.expr(node.children[1]) else 0
        if op == "||":
            return 1 if self.expr(node.children[0]) or self.expr(node.children[1]) else 0
        a = self.expr(node.children[0])
        b = self.expr(node.children[1])
        if op in ("<", ">", "<=", ">=", "==", "!="):
            table = {
                "<": a < b, ">": a > b, "<=": a <= b,
                ">=": a >= b, "==": a == b, "!=": a != b,
            }
            return 1 if table[op] else 0
        both_int = isinstance(a, int) and isinstance(b, int)
        if op == "+":
            return _wrap(a + b) if both_int else float(a) + float(b)
        if op == "-":
            return _wrap(a - b) if both_int else float(a) - float(b)
        if op == "*":
            return _wrap(a * b) if both_int else float(a) * float(b)
        if op == "/":
            if both_int:
                if b == 0:
                    raise OutOfBounds("integer division by zero")
                return _wrap(_c_div(a, b))
            return float(a) / float(b)
        if op == "%":
            if not both_int:
                raise UnsupportedFeature("% needs integer operands")
            if b == 0:
                raise OutOfBounds("integer remainder by zero")
            return _wrap(_c_mod(a, b))
        raise UnsupportedFeature(f"operator {op}")

    def unary(self, node: Node):
        op = node.op
        inner = node.children[0]
        if op == "-":
            v = self.expr(inner)
            return _wrap(-v) if isinstance(v, int) else -v
        if op == "!":
            return 0 if self.expr(inner) else 1
        if op in ("++", "--", "p++", "p--"):
            delta = 1 if op.endswith("++") else -1
            if inner.kind == "Var":
                old = self.read_scalar(inner.name)
                new = old + delta
                self.write_scalar(inner.name, new)
            elif inner.kind == "Index":
                old = self.read_cell(inner)
                new = old + delta
                self.write_cell(inner, new)
            else:
                raise UnsupportedFeature("++/-- needs a variable")
            if isinstance(old, int):
                new = _wrap(new)
            return old if op.startswith("p") else new
        raise UnsupportedFeature(f"operator {op}")

    # -- statements ----------------------------------------------------------------

    def assign_to(self, target: Node, value) -> None:
        if target.kind == "Var":
            existing = self.env.get(target.name)
            if isinstance(existing, np.ndarray):
                raise UnsupportedFeature(f"whole-array assignment to {target.name}")
            self.write_scalar(target.name, value)
        elif target.kind == "Index":
            self.write_cell(target, value)
        else:
            raise UnsupportedFeature("unsupported assignment target")

    def read_lvalue(self, target: Node):
        if target.kind == "Var":
            return self.read_scalar(target.name)
        if target.kind == "Index":
            return self.read_cell(target)
        raise UnsupportedFeature("unsupported assignment target")

    def decl(self, node: Node, inputs: dict) -> None:
        ndims = node.ndims or 0
        dtype = np.int64 if node.ctype == "int" else np.float64
        self.types[node.name] = node.ctype
        if ndims:
            shape = self.decl_shape(node, inputs, ndims)
            if node.name in inputs:
                arr = np.array(inputs[node.name], dtype=dtype)
                if arr.shape != shape:
                    raise ValueError(
                        f"input {node.name} has shape {arr.shape}, "
                        f"declared {shape}"
                    )
                self.env[node.name] = arr
            else:
                self.env[node.name] = np.zeros(shape, dtype=dtype)
            return
        if len(node.children) > ndims:
            self.write_scalar(node.name, self.expr(node.children[ndims]))
        elif node.name in inputs:
            self.write_scalar(node.name, inputs[node.name])
        else:
            self.env[node.name] = self.coerce(node.name, 0)

    def decl_shape(self, node: Node, inputs: dict, ndims: int) -> tuple[int, ...]:
        dims: list[int] = []
        for axis, dim_expr in enumerate(node.children[:ndims]):
            try:
                dims.append(self.int_index(dim_expr))
            except UnboundVariable:
                # Bind a symbolic dimension from the provided input array.
                if node.name not in inputs or dim_expr.kind != "Var":
                    raise
                extent = np.asarray(inputs[node.name]).shape[axis]
                saved, self.trace = self.trace, None
                self.write_scalar(dim_expr.name, int(extent))
                self.trace = saved
                dims.append(extent)
        return tuple(int(d) for d in dims)

    def stmt(self, node: Node, inputs: dict) -> None:
        k = node.kind
        if k == "Decl":
            self.tick()
            self.decl(node, inputs)
        elif k == "Assign":
            self.tick()
            self.assign_to(node.children[0], self.expr(node.children[1]))
        elif k == "AugAssign":
            self.tick()
            old = self.read_lvalue(node.children[0])
            rhs = self.expr(node.children[1])
            op = node.op[0]
            both_int = isinstance(old, int) and isinstance(rhs, int)
            if op == "+":
                new = old + rhs
            elif op == "-":
                new = old - rhs
            elif op == "*":
                new = old * rhs
            else:
                if both_int:
                    if rhs == 0:
                        raise OutOfBounds("integer division by zero")
                    new = _c_div(old, rhs)
                else:
                    new = float(old) / float(rhs)
            if both_int:
                new = _wrap(new)
            self.assign_to(node.children[0], new)
        elif k == "ExprStmt":
            self.tick()
            self.expr(node.children[0])
        elif k == "Block":
            for c in node.children:
                self.stmt(c, inputs)
        elif k == "For":
            init, cond, step, body = node.children
            self.stmt(init, inputs)
            while True:
                self.tick()
                if not self.expr(cond):
                    break
                self.stmt(body, inputs)
                if step.kind in ("Assign", "AugAssign"):
                    self.stmt(step, inputs)
                else:
                    self.tick()
                    self.expr(step)
        elif k == "While":
            cond, body = node.children
            while True:
                self.tick()
                if not self.expr(cond):
                    break
                self.stmt(body, inputs)
        elif k == "If":
            self.tick()
            if self.expr(node.children[0]):
                self.stmt(node.children[1], inputs)
            elif len(node.children) == 3:
                self.stmt(node.children[2], inputs)
        else:
            raise UnsupportedFeature(f"cannot execute {k}")


def _bind_symbolic_dims(it: _Interp, stmts, inputs: dict) -> None:
    """Bind one-variable array dimensions from input array extents before
    execution, so declaration order does not matter."""
    from .cast import iter_nodes

    for s in stmts:
        for node in iter_nodes(s):
            if node.kind != "Decl" or not node.ndims or node.name not in inputs:
                continue
            shape = np.asarray(inputs[node.name]).shape
            for axis, dim in enumerate(node.children[: node.ndims]):
                if dim.kind == "Var" and dim.name not in it.env and axis < len(shape):
                    it.env[dim.name] = _wrap(int(shape[axis]))


def _program_statements(ast: AnnotatedAst) -> tuple[tuple[Node, ...], tuple[Node, ...]]:
    """Returns (parameter decls, body statements)."""
    items = ast.root.children
    fns = [n for n in items if n.kind == "FuncDef"]
    if not fns:
        return (), items
    if len(fns) > 1 or len(items) > 1:
        raise UnsupportedFeature("evaluation needs a single function or plain statements")
    fn = fns[0]
    return fn.children[:-1], fn.children[-1].children


def run_statements(
    stmts,
    inputs: Optional[dict] = None,
    step_budget: int = 1_000_000,
    trace: Optional[Callable] = None,
    env: Optional[dict] = None,
    types: Optional[dict] = None,
) -> dict:
    """Execute a statement sequence and return the final environment."""
    inputs = dict(inputs or {})
    it = _Interp(step_budget, trace)
    if env:
        it.env.update(env)
    if types:
        it.types.update(types)
    for name, value in inputs.items():
        if isinstance(value, (list, tuple, np.ndarray)):
            arr = np.asarray(value)
            dtype = np.int64 if arr.dtype.kind in "iu" else np.float64
            it.env[name] = arr.astype(dtype)
        elif name not in it.env:
            it.env[name] = _wrap(value) if isinstance(value, int) else float(value)
    _bind_symbolic_dims(it, stmts, inputs)
    for s in stmts:
        it.stmt(s, inputs)
    return it.env


def evaluate(
    ast: AnnotatedAst,
    inputs: Optional[dict] = None,
    step_budget: int = 1_000_000,
    trace: Optional[Callable] = None,
) -> dict:
    """Run a program and return every variable's final value.

    inputs provides scalars and arrays by name; declarations take their
    initial values from it.  A one-variable symbolic array dimension is bound
    from the input array's extent when the dimension is otherwise unbound.
    """
    params, stmts = _program_statements(ast)
    inputs = dict(inputs or {})
    it = _Interp(step_budget, trace)
    for name, value in inputs.items():
        if not isinstance(value, (list, tuple, np.ndarray)):
            it.env[name] = _wrap(value) if isinstance(value, int) else float(value)
    _bind_symbolic_dims(it, params + stmts, inputs)
    for p in params:
        it.decl(p, inputs)
    for s in stmts:
        it.stmt(s, inputs)
    return it.env
