"""The two worked examples are the conformance gate"""

import pytest

from errors import SelfCheckFailed, UnknownExample
from field import mk_field
from main import WORKED_EXAMPLES, cmd_paper_example, compute_example, main
from poly import Polynomial


@pytest.mark.parametrize("which", [1, 2])
def test_tables_match(which):
    example = WORKED_EXAMPLES[which]
    computed = compute_example(example)
    assert computed["s_tilde"] == [example.s_tilde]
    assert computed["alphas"] == list(example.alphas)
    assert computed["h_alphas"] == list(example.h_alphas)
    assert computed["f_row"] == list(example.f_row)
    assert computed["h_row"] == list(example.h_row)
    assert computed["message"] == list(example.message)


def test_example_one_f_row():
    computed = cmd_paper_example(1, show=False)
    assert computed["f_row"] == [167, 61, 173, 92, 52, 147, 90, 170, 70, 117, 166]


def test_example_one_last_share_follows_the_polynomial():
    # a_11 = 12; the often quoted 116 is a misprint
    f = Polynomial.from_ints(mk_field(199), WORKED_EXAMPLES[1].alphas)
    assert f(12) == 166
    assert main(["paper-example", "1"]) == 0


def test_example_two_last_h_share_is_zero():
    assert cmd_paper_example(2, show=False)["h_row"][-1] == 0


def test_unknown_example():
    with pytest.raises(UnknownExample):
        cmd_paper_example(3)


def test_self_check_detects_drift(monkeypatch):
    broken = WORKED_EXAMPLES[1].__class__(**{**WORKED_EXAMPLES[1].__dict__, "s_tilde": 98})
    monkeypatch.setitem(WORKED_EXAMPLES, 1, broken)
    with pytest.raises(SelfCheckFailed):
        cmd_paper_example(1, show=False)
    assert main(["paper-example", "1"]) == 3


def test_cli_exit_codes(capsys):
    assert main(["paper-example", "1"]) == 0
    assert main(["paper-example", "2"]) == 0
    assert main(["paper-example", "3"]) == 2
    assert "Shares" in capsys.readouterr().out
