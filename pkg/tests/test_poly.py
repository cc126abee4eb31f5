import json

from formring import log
from formring.poly import T, X, Poly, PolyMat
from formring.rings import zmod


def test_parse_and_print():
    ctx = zmod(6)
    p = Poly.parse(ctx, "2X^2+X+5")
    assert p.degree(X) == 2
    assert p.constant_term() == ctx.parse(5)
    assert Poly.parse(ctx, str(p)) == p


def test_substitute_and_scale():
    ctx = zmod(8)
    p = Poly.parse(ctx, "X^2+3X")
    shifted = p.substitute(X, Poly.var(ctx, X) + Poly.var(ctx, T))
    assert shifted.evaluate(T, 0) == p
    assert p.scale_var(X, ctx.parse(2)) == Poly.parse(ctx, "4X^2+6X")
    assert p.evaluate(X, ctx.parse(1)) == Poly.const(ctx, ctx.parse(4))


def test_polymat_product():
    ctx = zmod(4)
    A = PolyMat.identity(ctx, 2)
    assert (A * A).is_identity()


def test_append_progress(tmp_path, monkeypatch):
    path = tmp_path / "progress.ndjson"
    monkeypatch.setenv("PROGRESS_LOG_PATH", str(path))
    monkeypatch.setenv("RUN_ID", "fixed")
    monkeypatch.setattr(log, "_PROGRESS_LOG_PATH", None)
    monkeypatch.setattr(log, "_RUN_ID", None)
    log.append_progress({"event": "suite", "passed": 3})
    row = json.loads(path.read_text(encoding="utf-8").splitlines()[0])
    assert row["event"] == "suite"
    assert row["run_id"] == "fixed"
    assert "ts" in row


def test_append_progress_disabled(monkeypatch):
    monkeypatch.delenv("PROGRESS_LOG_PATH", raising=False)
    monkeypatch.setattr(log, "_PROGRESS_LOG_PATH", None)
    log.append_progress({"event": "noop"})
