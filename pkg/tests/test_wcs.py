import numpy as np
import pytest
from hypothesis import given, strategies as st

from srsa import wcs
from srsa.errors import MalformedLine, NoMajorTerms, UnknownLanguage


def write(tmp_path, name, lines):
    p = tmp_path / name
    p.write_text("".join(line + "\n" for line in lines), encoding="utf-8")
    return p


def test_empty_term_file(tmp_path):
    ds = wcs.parse_wcs(write(tmp_path, "term.txt", []))
    assert ds.records == [] and ds.language_ids() == []


def test_single_record(tmp_path):
    ds = wcs.parse_wcs(write(tmp_path, "term.txt", ["1\t1\t5\tA"]))
    assert ds.records == [wcs.NamingRecord(1, 1, 5, "A")]
    nm = wcs.naming_matrix(ds, 1)
    assert nm.counts.shape == (1, 330)
    assert nm.counts.sum() == 1 and nm.counts[0, 4] == 1


def test_two_speakers_two_terms(tmp_path):
    ds = wcs.parse_wcs(write(tmp_path, "term.txt", ["1\t1\t7\tA", "1\t2\t7\tB"]))
    nm = wcs.naming_matrix(ds, 1)
    assert nm.terms == ["A", "B"]
    assert nm.counts[:, 6].tolist() == [1, 1]
    assert nm.counts.sum() == 2


def test_missing_file(tmp_path):
    with pytest.raises(FileNotFoundError):
        wcs.parse_wcs(tmp_path / "nope.txt")


def test_malformed_lines_are_reported(tmp_path):
    lines = ["lang\tspk\tchip\tterm", "1\t1\t5\tA", "1\t1\tx\tA", "1\t1", "1\t1\t999\tA"]
    ds = wcs.parse_wcs(write(tmp_path, "term.txt", lines))
    assert len(ds.records) == 1
    assert [m[1] for m in ds.malformed] == [3, 4, 5]
    with pytest.raises(MalformedLine) as exc:
        wcs.parse_wcs(tmp_path / "term.txt", strict=True)
    assert exc.value.lineno == 3


def test_names_and_lookup(tmp_path):
    write(tmp_path, "term.txt", ["1\t1\t5\tA", "2\t1\t5\tB"])
    write(tmp_path, "lang.txt", ["1\tKarajá", "2\tCulina"])
    write(tmp_path, "dict.txt", ["1\t1\tred\tA"])
    ds = wcs.load_wcs_dir(tmp_path)
    assert ds.find_language("karaja") == 1
    assert ds.find_language("CULINA") == 2
    assert ds.glosses[(1, "A")] == "red"
    with pytest.raises(UnknownLanguage):
        ds.find_language("nowhere")
    with pytest.raises(UnknownLanguage):
        wcs.naming_matrix(ds, 3)


def test_conservation(tmp_path):
    rng = np.random.default_rng(0)
    lines = [f"1\t{s}\t{c}\tt{rng.integers(4)}" for s in range(1, 6) for c in range(1, 331)]
    ds = wcs.parse_wcs(write(tmp_path, "term.txt", lines))
    nm = wcs.naming_matrix(ds, 1)
    assert nm.counts.sum() == len(ds.records_for(1))
    np.testing.assert_array_equal(nm.counts.sum(axis=0), 5)


def test_matrix_json_round_trip():
    nm = wcs.NamingMatrix(3, ["a", "b"], np.array([[1, 0, 2], [0, 3, 0]]))
    nm2 = wcs.NamingMatrix.loads(nm.dumps())
    assert nm2.language_id == 3 and nm2.terms == nm.terms
    np.testing.assert_array_equal(nm2.counts, nm.counts)


def counts_with_modes(wins, n_chips=40):
    """Count matrix where term i is the sole mode of wins[i] chips."""
    k = len(wins)
    C = np.zeros((k, n_chips), dtype=int)
    col = 0
    for i, w in enumerate(wins):
        for _ in range(w):
            C[i, col] = 3
            C[(i + 1) % k, col] = 1
            col += 1
    return wcs.NamingMatrix(1, [f"t{i}" for i in range(k)], C)


def test_single_term_survives():
    nm = wcs.NamingMatrix(1, ["a"], np.ones((1, 330), dtype=int))
    assert wcs.major_terms(nm).terms == ["a"]


def test_nine_chip_term_removed():
    nm = counts_with_modes([10, 9, 12])
    kept = wcs.major_terms(nm)
    assert kept.terms == ["t0", "t2"]
    np.testing.assert_array_equal(kept.counts, nm.counts[[0, 2]])


def test_no_major_terms():
    with pytest.raises(NoMajorTerms):
        wcs.major_terms(counts_with_modes([5, 5]))


def test_mode_ties_prefer_more_uses_then_lower_index():
    C = np.array([[2, 1, 0], [2, 5, 0], [0, 1, 0]])
    assert wcs.chip_modes(C).tolist() == [1, 1, -1]
    C2 = np.array([[2, 2], [2, 2]])
    assert wcs.chip_modes(C2).tolist() == [0, 0]


def brute_modes(C):
    out = []
    for m in range(C.shape[1]):
        col = C[:, m]
        if col.sum() == 0:
            out.append(-1)
            continue
        best = None
        for t in range(C.shape[0]):
            key = (col[t], C[t].sum(), -t)
            if best is None or key > best[0]:
                best = (key, t)
        out.append(best[1])
    return out


@given(st.integers(1, 5), st.integers(1, 30), st.integers(0, 10 ** 6))
def test_major_terms_properties(k, n, seed):
    rng = np.random.default_rng(seed)
    C = rng.integers(0, 4, (k, n))
    nm = wcs.NamingMatrix(1, [f"t{i}" for i in range(k)], C)
    assert wcs.chip_modes(C).tolist() == brute_modes(C)
    modes = np.array(brute_modes(C))
    expected = [t for t in range(k) if (modes == t).sum() >= 3]
    if not expected:
        with pytest.raises(NoMajorTerms):
            wcs.major_terms(nm, min_chips=3)
        return
    kept = wcs.major_terms(nm, min_chips=3)
    assert kept.terms == [f"t{i}" for i in expected]
    np.testing.assert_array_equal(kept.counts, C[expected])
    again = wcs.major_terms(kept, min_chips=3)
    wins = np.bincount(wcs.chip_modes(kept.counts)[wcs.chip_modes(kept.counts) >= 0],
                       minlength=len(kept.terms))
    if np.all(wins >= 3):
        assert again.terms == kept.terms
    assert len(again.terms) <= len(kept.terms)


def test_wcs_game_deterministic_naming(chart):
    C = np.zeros((3, 330), dtype=int)
    C[np.arange(330) % 3, np.arange(330)] = 4
    nm = wcs.NamingMatrix(1, ["a", "b", "c"], C)
    g, empty = wcs.wcs_game(nm, chart)
    np.testing.assert_array_equal(g.meaning_fn, np.eye(3)[np.arange(330) % 3])
    np.testing.assert_allclose(g.prior, 1 / 330)
    assert not empty.any()


def test_wcs_game_empty_chip_gets_uniform_row(chart):
    C = np.ones((2, 330), dtype=int)
    C[:, 10] = 0
    g, empty = wcs.wcs_game(wcs.NamingMatrix(1, ["a", "b"], C), chart)
    assert empty.tolist().count(True) == 1 and empty[10]
    np.testing.assert_allclose(g.meaning_fn[10], [0.5, 0.5])


def test_synthetic_languages_give_valid_games(tmp_path, chart):
    from srsa import synthetic
    langs = synthetic.default_languages(4, 0)
    synthetic.write_wcs_dir(tmp_path, chart, langs, 1)
    ds = wcs.load_wcs_dir(tmp_path)
    assert ds.language_ids() == [1, 2, 3, 4]
    for lid in ds.language_ids():
        nm = wcs.major_terms(wcs.naming_matrix(ds, lid, chart.ids))
        g, _ = wcs.wcs_game(nm, chart)
        assert g.n == 330
        assert nm.counts.sum(axis=0).max() <= langs[lid - 1].n_speakers
