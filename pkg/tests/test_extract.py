import hashlib

from hypothesis import given, settings, strategies as st

from docforge.extract import (
    MAX_GAP_LINES,
    extract_file,
    record_from_row,
    record_to_row,
    stable_id,
)


def run(src, repo="r", rel_path="p.java"):
    return extract_file(repo, rel_path, src)


def pairs(src):
    fx = run("class A {\n%s\n}" % src)
    return [(r.javadoc.description, r.decl.name) for r in fx.records]


class TestPairing:
    def test_adjacent_lines_pair(self):
        assert pairs("/** a */\nvoid f() {}") == [("a", "f")]

    def test_same_line_pairs(self):
        assert pairs("/** a */ void f() {}") == [("a", "f")]

    def test_annotations_between_are_fine(self):
        src = '/** a */\n@Listener(event = "x(y)")\n@Order(10)\nvoid f() {}'
        assert pairs(src) == [("a", "f")]

    def test_statement_between_orphans(self):
        fx = run("class A {\n/** a */\nx = 1;\nvoid f() {}\n}")
        assert fx.records == []
        assert fx.orphans == 1

    def test_doc_pairs_with_nearest_field(self):
        # an undocumented method after a documented field does not steal it
        assert pairs("/** a */\nint x;\nvoid f() {}") == [("a", "x")]

    def test_gap_boundary(self):
        ok = "/** a */" + "\n" * (MAX_GAP_LINES + 1) + "void f() {}"
        too_far = "/** a */" + "\n" * (MAX_GAP_LINES + 2) + "void f() {}"
        assert pairs(ok) == [("a", "f")]
        assert pairs(too_far) == []

    def test_stacked_docs_keep_only_nearest(self):
        fx = run("class A {\n/** a */\n/** b */\nvoid f() {}\n}")
        assert [(r.javadoc.description, r.decl.name) for r in fx.records] == [("b", "f")]
        assert fx.orphans == 1

    def test_one_doc_two_decls_pairs_first(self):
        assert pairs("/** a */\nvoid f() {}\nvoid g() {}") == [("a", "f")]

    def test_each_decl_pairs_at_most_once(self):
        # two docs, one decl: the nearer wins, the other orphans
        fx = run("class A {\n/** far */\n\n/** near */\nvoid f() {}\n}")
        assert len(fx.records) == 1
        assert fx.records[0].javadoc.description == "near"
        assert fx.orphans == 1

    def test_package_doc_is_orphan(self):
        fx = run("/** Pkg doc. */\npackage a.b;")
        assert fx.records == []
        assert fx.orphans == 1

    def test_trailing_doc_is_orphan(self):
        fx = run("class A {\nvoid f() {}\n/** tail */\n}")
        assert fx.orphans == 1

    def test_undocumented_decls_produce_no_records(self):
        fx = run("class A { void f() {} int x; }")
        assert fx.records == []
        assert fx.orphans == 0


class TestRecords:
    SRC = (
        "package p.q;\n"
        "/** Type doc. */\n"
        "public class A {\n"
        "    /** Member doc. */\n"
        "    public int f(int x) {\n"
        "        return x;\n"
        "    }\n"
        "}\n"
    )

    def test_code_is_exact_source_slice(self):
        fx = run(self.SRC)
        for r in fx.records:
            lo, hi = r.decl.span
            assert r.code == self.SRC[lo:hi]

    def test_member_slice_spans_header_through_body(self):
        fx = run(self.SRC)
        member = [r for r in fx.records if r.decl.kind == "method"][0]
        assert member.code == "public int f(int x) {\n        return x;\n    }"

    def test_package_and_metadata(self):
        fx = extract_file("repo1", "a/b.java", self.SRC, license_id="MIT")
        member = [r for r in fx.records if r.decl.kind == "method"][0]
        assert member.decl.package == "p.q"
        assert member.repo == "repo1"
        assert member.rel_path == "a/b.java"
        assert member.license_id == "MIT"

    def test_degraded_and_warnings_propagate(self):
        fx = run('class A {\n/** d */\nvoid ok() {}\nvoid broken() { if (x) {\n')
        assert fx.degraded is True
        fx2 = run('class A { String s = "open\n}')
        assert any("unterminated" in w for w in fx2.warnings)


class TestStableId:
    def test_matches_reference_digest(self):
        want = hashlib.sha256(b"discord4j\nA.java\n10:20").hexdigest()[:16]
        assert stable_id("discord4j", "A.java", (10, 20)) == want
        assert stable_id("discord4j", "A.java", (10, 20)) == "f75d269d38ccd63b"

    def test_distinct_inputs_distinct_ids(self):
        a = stable_id("r", "p.java", (0, 5))
        assert a != stable_id("r", "p.java", (0, 6))
        assert a != stable_id("r", "q.java", (0, 5))
        assert a != stable_id("s", "p.java", (0, 5))

    @given(st.text(max_size=30), st.text(max_size=30),
           st.integers(0, 10**6), st.integers(0, 10**6))
    def test_id_shape(self, repo, path, a, b):
        sid = stable_id(repo, path, (a, b))
        assert len(sid) == 16
        assert all(c in "0123456789abcdef" for c in sid)


class TestRowRoundTrip:
    def test_row_keys_stable(self):
        fx = extract_file("r", "p.java", TestRecords.SRC, license_id="MIT")
        row = record_to_row(fx.records[0])
        assert set(row) == {
            "repo", "rel_path", "package", "enclosing_class", "kind",
            "signature", "code", "javadoc_raw", "javadoc_description",
            "javadoc_tags", "uses_lambda", "license_id", "span", "javadoc_span",
        }

    def test_round_trip_preserves_identity(self):
        fx = extract_file("r", "p.java", TestRecords.SRC, license_id="MIT")
        for rec in fx.records:
            back = record_from_row(record_to_row(rec))
            assert back.stable_id == rec.stable_id
            assert back.code == rec.code
            assert back.javadoc.raw == rec.javadoc.raw
            assert back.javadoc.description == rec.javadoc.description
            assert back.decl.kind == rec.decl.kind
            assert back.decl.signature == rec.decl.signature

    def test_tags_survive_round_trip(self):
        src = ("class A {\n/**\n * D.\n * @param x the input\n * @return the output\n */\n"
               "int f(int x) { return x; }\n}")
        fx = run(src)
        back = record_from_row(record_to_row(fx.records[0]))
        assert [(t.name, t.argument, t.text) for t in back.javadoc.tags] == [
            ("param", "x", "the input"),
            ("return", None, "the output"),
        ]


IDENT = st.from_regex(r"[a-z][a-z0-9]{0,6}", fullmatch=True)


@st.composite
def java_files(draw):
    """A well-formed class with a random mix of documented members."""
    n = draw(st.integers(1, 6))
    out = ["class Top {"]
    documented = 0
    for i in range(n):
        kind = draw(st.sampled_from(["method", "field"]))
        doc = draw(st.booleans())
        name = f"m{i}"
        if doc:
            out.append(f"    /** Doc for {name}. */")
            documented += 1
        if kind == "method":
            out.append(f"    int {name}() {{ return {i}; }}")
        else:
            out.append(f"    int {name} = {i};")
    out.append("}")
    return "\n".join(out), documented


class TestPairingProperties:
    @settings(max_examples=50)
    @given(java_files())
    def test_every_doc_pairs_in_clean_files(self, case):
        src, documented = case
        fx = run(src)
        assert len(fx.records) == documented
        assert fx.orphans == 0

    @settings(max_examples=50)
    @given(java_files())
    def test_records_sorted_and_disjoint(self, case):
        src, _ = case
        fx = run(src)
        last_end = -1
        for r in fx.records:
            assert r.javadoc.span[1] <= r.decl.span[0]
            assert r.decl.span[0] > last_end
            last_end = r.decl.span[1]

    @settings(max_examples=50)
    @given(java_files())
    def test_slices_always_exact(self, case):
        src, _ = case
        for r in run(src).records:
            assert r.code == src[r.decl.span[0]:r.decl.span[1]]
