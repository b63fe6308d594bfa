import io

import pytest

from galoisres import field as F
from galoisres.cli import run
from galoisres.corpus import CORPUS_FILES, corpus_text, golden_checks, load_corpus
from galoisres.io import LoadError, Workspace, dumps, load, loads, save
from galoisres.module import find_isomorphism

SQUARE = """
[poset sq]
elements = a b c d
covers = a<b a<c b<d c<d

[module bad: sq]
dim a = 1
dim b = 1
dim c = 1
dim d = 1
arrow a b = 1
arrow a c = 1
arrow b d = 1
arrow c d = -1
"""

COUPLING = """
[poset two]
elements = 1 2
covers = 1<2

[map id: two -> two]
1 = 1
2 = 2

[module V: two]
interval = 1 2

[coupling C]
apex = two
f = id
g = id
h = id
i = id
gamma = V
M = V
N = V
"""


def cli(*args: str) -> tuple[int, str]:
    buf = io.StringIO()
    code = run(list(args), buf)
    return code, buf.getvalue()


def test_bundled_corpus_loads_and_round_trips():
    ws = load_corpus()
    assert {"chainM", "gridM", "luisM", "nonisoN", "zero"} <= set(ws.modules)
    for name in CORPUS_FILES:
        text = corpus_text(name)
        assert dumps(loads(text, name)) == text


def test_round_trip_through_file(tmp_path):
    ws = load_corpus()
    path = tmp_path / "all.gpm"
    save(ws, path)
    again = load(path)
    for name, M in ws.modules.items():
        assert again.module(name).equals(M)
    assert dumps(again) == dumps(ws)


def test_empty_file():
    ws = loads("", "empty")
    assert isinstance(ws, Workspace) and not ws.modules and dumps(ws) == ""


def test_anticommuting_square_is_rejected():
    with pytest.raises(LoadError, match="does not commute: square a->b->d vs a->c->d"):
        loads(SQUARE, "sq.gpm")


@pytest.mark.parametrize(
    "text,pattern",
    [
        ("elements = 1", "content before the first section"),
        ("[poset P\nelements = 1", "malformed section header"),
        ("[poset P]\nelements = 1 2\ncovers = 1-2", "should look like a<b"),
        ("[module M: Q]\ndim 1 = 1", "unknown poset 'Q'"),
        ("[poset P]\nelements = 1 2\ncovers = 1<2\n[module M: P]\ndim 1 = 1\ndim 2 = 1\narrow 1 2 = 1 1", "matrix should be 1x1"),
        ("[poset P]\nelements = a b c\n[metric P]\nrow a = 0 1 5\nrow b = 1 0 1\nrow c = 5 1 0", "triangle"),
        ("[settings]\nprime = 12", "prime"),
        ("[widget W]\n", "unknown section kind"),
    ],
)
def test_load_errors(text, pattern):
    with pytest.raises(LoadError, match=pattern):
        loads(text, "bad.gpm")


def test_error_carries_location():
    with pytest.raises(LoadError) as err:
        loads("[poset P]\nelements = 1 2\ncovers = 1<3\n", "loc.gpm")
    assert str(err.value).startswith("loc.gpm:")


def test_redefinition_must_agree():
    ws = load_corpus()
    ws.merge(loads(corpus_text("stability.gpm"), "again"))
    other = loads("[poset chain2]\nelements = 1 2\n", "clash")
    with pytest.raises(ValueError, match="defined twice"):
        ws.merge(other)


def test_coupling_section():
    ws = loads(COUPLING, "c.gpm")
    c = ws.couplings["C"]
    assert c.cost == 0 and find_isomorphism(c.M, c.N) is not None
    assert "[coupling C]" in dumps(ws)


def test_settings_prime():
    old = F.prime()
    try:
        ws = loads("[settings]\nprime = 7\nslack = 2\n", "s.gpm")
        assert ws.prime == 7 and ws.slack == 2
    finally:
        F.set_prime(old)


# -- CLI ----------------------------------------------------------------------------


def test_cli_distb_exact():
    code, out = cli("distb", "chainM", "chainN")
    assert code == 0
    assert "bracket [1, 1]" in out and "# prime" in out


def test_cli_distb_self():
    code, out = cli("distb", "chainM", "chainM")
    assert code == 0 and "bracket [0, 0]" in out


def test_cli_open_bracket():
    code, out = cli("distb", "luisM", "zero")
    assert code == 3 and "bracket [1, 2]" in out


def test_cli_prematch():
    code, out = cli("distb-pre", "luisM", "zero")
    assert code == 0 and "bracket [1, 1]" in out


def test_cli_gt_and_stability():
    code, out = cli("gt-upper", "chainM", "chainN", "--sigma", "shift4")
    assert code == 0 and "gt upper 1" in out
    code, out = cli("gt-upper", "gridM", "gridN", "--sigma", "shift", "--mode", "intervals")
    assert code == 0 and "gt upper 1" in out
    code, out = cli("stability", "chainM", "chainN", "--sigma", "shift4")
    assert code == 0 and "dist_B on kernel diagrams: [1, 1]" in out
    code, out = cli("gt-zero", "nonisoM", "nonisoN")
    assert code == 0 and "isomorphic: no" in out


def test_cli_module_commands():
    assert cli("resolve", "gridM")[0] == 0
    code, out = cli("kernel", "chainN")
    assert code == 0 and "(2,4): 1" in out
    code, out = cli("diagram", "chainM")
    assert code == 0 and "degree 0 (+)" in out
    code, out = cli("ext", "chainM", "1")
    assert code == 0 and out.strip().splitlines()[-1].startswith("ext dims:")


def test_cli_usage_errors(tmp_path):
    assert cli("distb", "chainM")[0] == 2
    assert cli("distb", "chainM", "nope")[0] == 2
    assert cli("distb", "chainM", "gridM")[0] == 2
    assert cli("ext", "chainM", "zz")[0] == 2
    assert cli("nonsense")[0] == 2
    bad = tmp_path / "bad.gpm"
    bad.write_text(SQUARE)
    code, out = cli("-f", str(bad), "resolve", "bad")
    assert code == 2 and "does not commute" in out


def test_cli_user_file(tmp_path):
    path = tmp_path / "two.gpm"
    path.write_text(COUPLING)
    code, out = cli("-f", str(path), "distb", "V", "V")
    assert code == 0 and f"# sources {path}" in out


def test_verify_examples():
    code, out = cli("verify-examples")
    assert code == 0
    assert out.count("PASS") == 9 and "NOTE" in out
    assert sum(1 for g in golden_checks() if g.known_discrepancy) == 1
