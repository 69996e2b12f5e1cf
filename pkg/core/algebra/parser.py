"""
多项式文本语法
表达式交给 sympy 解析（^ 与 ** 均表示乘方），再经 sympy.Poly 展开为规范形式。
只认声明过的变量；除法只允许除以非零常数，因此 "2/3" 这类有理字面量可以直接书写。
"""

from __future__ import annotations

import ast
import re
from collections.abc import Sequence
from tokenize import TokenError

import sympy as sp
from sympy.parsing.sympy_parser import auto_symbol, convert_xor, parse_expr
from sympy.polys.polyerrors import BasePolynomialError

from ...models.errors import (
    InvalidExponentError,
    PolynomialSyntaxError,
    UnknownVariableError,
)
from .polynomial import Polynomial

# 数字字面量保持为 Python 浮点/整数，系数与手写浮点运算一致
_TRANSFORMATIONS = (auto_symbol, convert_xor)


def _name_position(text: str, name: str) -> int:
    match = re.search(rf"(?<![A-Za-z_0-9]){re.escape(name)}(?![A-Za-z_0-9])", text)
    return match.start() if match else 0


def _operator_position(text: str, operators: Sequence[str]) -> int:
    found = [text.find(op) for op in operators if op in text]
    return min(found) if found else 0


def _syntax_position(text: str) -> int:
    """语法错误在原文中的位置：'^' 换成等长的 '*' 后交给 Python 语法分析器定位"""
    stripped = text.lstrip()
    lead = len(text) - len(stripped)
    try:
        ast.parse(stripped.replace("^", "*"), mode="eval")
    except SyntaxError as e:
        if e.offset:
            return min(lead + max(e.offset - 1, 0), len(text))
    return lead


def _sympy_expression(text: str, symbols: dict[str, sp.Symbol]) -> sp.Expr:
    global_dict = {"Symbol": sp.Symbol, "__builtins__": {}}
    try:
        raw = parse_expr(
            text.strip(),
            local_dict=dict(symbols),
            global_dict=global_dict,
            transformations=_TRANSFORMATIONS,
        )
    except (SyntaxError, TokenError) as e:
        raise PolynomialSyntaxError(f"语法错误: {text!r}", _syntax_position(text)) from e
    except ZeroDivisionError as e:
        raise PolynomialSyntaxError("除数为零", _operator_position(text, ["/"])) from e
    except NameError as e:
        raise PolynomialSyntaxError(f"不支持的函数调用: {e}", _operator_position(text, ["("])) from e
    except (TypeError, ValueError, AttributeError, OverflowError) as e:
        raise PolynomialSyntaxError(f"无法解析为多项式: {e}", 0) from e
    try:
        return sp.sympify(raw)
    except sp.SympifyError as e:
        raise PolynomialSyntaxError(f"无法解析为多项式: {text!r}", 0) from e


def _check_powers(expr: sp.Expr, text: str) -> sp.Expr:
    """变量的乘方必须是非负整数次；整数值的浮点指数换成整数"""
    replacements = {}
    for power in expr.atoms(sp.Pow):
        if not power.base.free_symbols:
            continue
        exponent = power.exp
        position = _operator_position(text, ["^", "**", "/"])
        if not exponent.is_Number or not float(exponent).is_integer():
            raise InvalidExponentError(f"指数 {exponent} 不是非负整数", position)
        if exponent < 0:
            raise InvalidExponentError("出现负指数（或以变量作除数）", position)
        if not exponent.is_Integer:
            replacements[power] = sp.Pow(power.base, int(exponent))
    return expr.xreplace(replacements) if replacements else expr


def parse_polynomial(text: str, variables: Sequence[str]) -> Polynomial:
    """把表达式文本解析为规范展开的多项式"""
    variables = list(variables)
    if not variables:
        raise ValueError("变量列表不能为空")
    if len(set(variables)) != len(variables):
        raise ValueError(f"变量名重复: {variables}")
    if not text.strip():
        raise PolynomialSyntaxError("表达式为空", 0)

    symbols = {name: sp.Symbol(name) for name in variables}
    expr = _sympy_expression(text, symbols)

    declared = set(symbols.values())
    unknown = sorted((s for s in expr.free_symbols if s not in declared), key=lambda s: _name_position(text, s.name))
    if unknown:
        name = unknown[0].name
        raise UnknownVariableError(f"未知变量 {name!r}", _name_position(text, name))
    if expr.has(sp.zoo, sp.oo, -sp.oo, sp.nan):
        raise PolynomialSyntaxError("除数为零或数值溢出", _operator_position(text, ["/"]))
    if expr.atoms(sp.Function):
        raise PolynomialSyntaxError("表达式中含有函数调用", _operator_position(text, ["("]))
    expr = _check_powers(expr, text)

    try:
        poly = sp.Poly(expr, *(symbols[name] for name in variables))
    except BasePolynomialError as e:
        raise PolynomialSyntaxError(f"不是多项式: {e}", 0) from e
    terms = {tuple(int(a) for a in monomial): float(coefficient) for monomial, coefficient in poly.terms()}
    return Polynomial(len(variables), terms)


def default_variables(dim: int) -> list[str]:
    return [f"x{i + 1}" for i in range(dim)]


def format_coefficient(value: float) -> str:
    """整数值系数省略小数部分，其余使用最短往返表示"""
    if value.is_integer() and abs(value) < 1e15:
        return str(int(value))
    return repr(value)


def format_polynomial(p: Polynomial, variables: Sequence[str] | None = None) -> str:
    """规范打印，输出可被 parse_polynomial 原样解析"""
    names = list(variables) if variables is not None else default_variables(p.dim)
    if len(names) != p.dim:
        raise ValueError(f"变量名个数 {len(names)} 与维数 {p.dim} 不一致")
    if p.is_zero:
        return "0"

    pieces: list[str] = []
    for exponent, coefficient in p.terms.items():
        factors = [
            name if power == 1 else f"{name}^{power}"
            for name, power in zip(names, exponent)
            if power
        ]
        magnitude = abs(coefficient)
        if not factors:
            body = format_coefficient(magnitude)
        elif magnitude == 1.0:
            body = "*".join(factors)
        else:
            body = "*".join([format_coefficient(magnitude), *factors])

        negative = coefficient < 0
        if not pieces:
            pieces.append(f"-{body}" if negative else body)
        else:
            pieces.append(f" - {body}" if negative else f" + {body}")
    return "".join(pieces)
