import math
import os
import tempfile

import pytest

import holgraph

REFL = "(a (c (fun (fun A bool) bool) !) (l (v A x) (a (a (c (fun A (fun A bool)) =) (v A x)) (v A x))))"

TINY = ["--hops", "1", "--token-dim", "4", "--node-dim", "4", "--hidden-dim", "5", "--pool-widths", "6", "6",
        "--tactic-widths", "5", "--combiner-widths", "5", "--goals-per-batch", "2", "--negatives-per-goal", "2"]


def test_canonical_roundtrip():
    text = holgraph.canonical(REFL)
    assert holgraph.canonical(text) == text


def test_parse_error_is_value_error():
    with pytest.raises(holgraph.ParseError):
        holgraph.canonical("(a (c")
    with pytest.raises(ValueError):
        holgraph.canonical(")")


def test_sharing_shrinks_graph():
    tree = holgraph.stats(REFL, sharing="ast")
    leaf = holgraph.stats(REFL, sharing="leaf")
    dag = holgraph.stats(REFL, sharing="subexpr")
    assert tree["nodes"] >= leaf["nodes"] >= dag["nodes"]
    assert tree["edges"] == tree["nodes"] - 1


def test_graph_dict_is_consistent():
    g = holgraph.graph(REFL, sharing="subexpr", direction="topdown")
    n = len(g["tokens"])
    assert 0 <= g["root"] < n
    assert g["direction"] == "topdown"
    assert all(0 <= s < n and 0 <= d < n for s, d, _ in g["edges"])


def test_direction_needs_sharing():
    with pytest.raises(ValueError):
        holgraph.graph(REFL, sharing="ast", direction="topdown")


def test_tactics():
    assert holgraph.apply_tactic(REFL, 0) == []
    with pytest.raises(holgraph.TacticError):
        holgraph.apply_tactic(REFL, 41)


def test_cli_exit_codes():
    code, _, _ = holgraph.run_cli([])
    assert code == 2
    code, out, _ = holgraph.run_cli(["parse", "--expr", REFL])
    assert code == 0
    assert out.strip() == holgraph.canonical(REFL)


def test_corpus_train_and_score():
    with tempfile.TemporaryDirectory() as tmp:
        db = os.path.join(tmp, "c.db")
        log = os.path.join(tmp, "c.log")
        records, steps = holgraph.generate_corpus(3, 20, db, log)
        assert records > 20 and steps > 0
        ckpt = os.path.join(tmp, "m.ckpt")
        code, _, err = holgraph.run_cli(
            ["train", "--theorem-db", db, "--proof-log", log, "--checkpoint", ckpt,
             "--steps", "2", "--eval-every", "2", "--float64"] + TINY)
        assert code == 0, err
        model = holgraph.Model(ckpt, params="live")
        assert model.hops == 1
        logits = model.tactic_logits(REFL)
        assert len(logits) == 41
        assert all(math.isfinite(x) for x in logits)
        scores = model.score_premises(REFL, [REFL, REFL])
        assert len(scores) == 2 and scores[0] == scores[1]
        assert len(model.embed_goal(REFL)) == len(model.embed_premise(REFL))
