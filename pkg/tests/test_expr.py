import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spectral_holonomy import expr
from spectral_holonomy.errors import DSLSyntaxError, UnknownIdentifier


def ev(text, **env):
    return complex(expr.evaluate(expr.parse(text), {k: np.complex128(v) for k, v in env.items()}))


@pytest.mark.parametrize("text, value", [
    ("1 + 2*3", 7),
    ("2^3^1", None),
    ("-2^2", -4),
    ("(1+i)^2", 2j),
    ("-x*y", -6),
    ("x - -1", 3),
    ("10/4", 2.5),
    ("sqrt(-4)", 2j),
    ("exp(0)", 1),
    ("re(3+4*i) + im(3+4*i)", 7),
    ("abs(3+4*i)", 5),
    ("cos(0) + sin(0)", 1),
    ("1e-3*1000", 1),
])
def test_evaluate(text, value):
    if value is None:
        with pytest.raises(DSLSyntaxError):
            expr.parse(text)
    else:
        assert np.isclose(ev(text, x=2, y=3), value)


def test_conj():
    assert ev("conj(z)", z=1 + 2j) == 1 - 2j


def test_unary_minus_only_at_term_head():
    assert ev("-x + -y", x=1, y=2) == -3
    with pytest.raises(DSLSyntaxError):
        expr.parse("x * -y")


@pytest.mark.parametrize("text", ["z^^2", "2^x", "2^1.5", "1 +", "(1", "sqrt 2", "1 $ 2", ""])
def test_syntax_errors(text):
    with pytest.raises(DSLSyntaxError):
        expr.parse(text)


def test_syntax_error_position():
    with pytest.raises(DSLSyntaxError) as info:
        expr.parse("x +\n  * 2", where="entries[0][1]")
    assert (info.value.line, info.value.column) == (2, 3)
    assert "entries[0][1]" in str(info.value)


def test_unknown_function_and_name():
    with pytest.raises(UnknownIdentifier):
        expr.parse("tan(1)")
    with pytest.raises(UnknownIdentifier):
        expr.evaluate(expr.parse("q + 1"), {})


def test_names():
    assert expr.names(expr.parse("a*conj(b) + i - 2^3 + c^2")) == {"a", "b", "c"}


def test_vectorised_evaluation():
    x = np.linspace(0, 1, 7).astype(complex)
    out = expr.evaluate(expr.parse("x^2 + 2*i*x"), {"x": x})
    assert np.allclose(out, x ** 2 + 2j * x)


leaf = st.one_of(
    st.floats(0, 100, allow_nan=False).map(lambda v: str(round(v, 6))),
    st.sampled_from(["i", "a", "b"]),
)


def _combine(children):
    return st.one_of(
        st.tuples(children, st.sampled_from("+-*/"), children).map(lambda t: f"({t[0]} {t[1]} {t[2]})"),
        st.tuples(children, st.integers(0, 3)).map(lambda t: f"({t[0]})^{t[1]}"),
        st.tuples(st.sampled_from(sorted(expr.FUNCTIONS)), children).map(lambda t: f"{t[0]}({t[1]})"),
        children.map(lambda s: f"(-({s}))"),
    )


expressions = st.recursive(leaf, _combine, max_leaves=12)


@settings(max_examples=200, deadline=None)
@given(expressions)
def test_print_parse_round_trip(text):
    tree = expr.parse(text)
    again = expr.parse(expr.to_text(tree))
    assert again == tree
    rng = np.random.default_rng(0)
    env = {"a": rng.normal(size=50) + 1j * rng.normal(size=50), "b": rng.normal(size=50) + 0j}
    with np.errstate(all="ignore"):
        v1 = expr.evaluate(tree, env)
        v2 = expr.evaluate(again, env)
    assert np.array_equal(np.broadcast_to(v1, (50,)), np.broadcast_to(v2, (50,)), equal_nan=True)
