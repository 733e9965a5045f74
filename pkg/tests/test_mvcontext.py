import numpy as np
import pytest

from reference_tables import SCALED_COLUMNS, SCALED_ROWS, parse_rows
from treefca.errors import (
    DomainViolation,
    DuplicateObject,
    IncompleteContext,
    ParseError,
    ScaleDomainViolation,
    UnknownAttribute,
)
from treefca.fclattice import count_concepts, enumerate_concepts
from treefca.mvcontext import (
    GEQ,
    LEQ,
    LogicalFormula,
    ManyValuedContext,
    Predicate,
    ValueDomain,
    atom,
    equals,
    interordinal_predicates,
    interordinal_scale,
    interordinal_scale_context,
    load_csv,
    load_domain_spec,
    logical_scale,
    nominal_scale,
    plain_scale,
    predicate_context,
    satisfies,
    save_csv,
)

SIZE = ValueDomain("size", ["s", "m", "l"])


def tiny(rows=(("s",), ("l",), (None,))):
    return ManyValuedContext.from_rows(["a", "b", "c"], [SIZE], list(rows), ["x", "y", "x"])


class TestDomainsAndPredicates:
    def test_successor_predecessor(self):
        assert SIZE.successor("s") == "m"
        assert SIZE.predecessor("l") == "m"
        with pytest.raises(ValueError):
            SIZE.successor("l")

    def test_negation_is_involutive(self):
        p = Predicate("size", LEQ, "m")
        assert p.negation(SIZE) == Predicate("size", GEQ, "l")
        assert p.negation(SIZE).negation(SIZE) == p

    def test_string_forms(self):
        p = Predicate("humidity", GEQ, "high")
        assert str(p) == "humidity:>=:high"
        assert Predicate.parse(str(p)) == p
        assert p.label == "humidity>=high"
        assert Predicate("windy", GEQ, "True").label == "windy"
        assert Predicate("windy", LEQ, "False").label == "not windy"
        assert Predicate.from_dict(p.to_dict()) == p

    def test_satisfies_is_tristate(self):
        ctx = tiny()
        p = Predicate("size", LEQ, "m")
        assert satisfies(ctx, "a", p) is True
        assert satisfies(ctx, "b", p) is False
        assert satisfies(ctx, "c", p) is None


class TestContext:
    def test_domain_violation(self):
        with pytest.raises(DomainViolation) as exc:
            tiny(rows=(("s",), ("xl",), ("m",)))
        assert exc.value.row == 1 and exc.value.token == "xl"

    def test_duplicate_objects(self):
        with pytest.raises(DuplicateObject):
            ManyValuedContext.from_rows(["a", "a"], [SIZE], [["s"], ["m"]])

    def test_unknown_attribute(self):
        with pytest.raises(UnknownAttribute):
            tiny().domain("weight")

    def test_take_allows_repeats(self):
        ctx = tiny()
        bag = ctx.take([0, 0, 1], objects=["a", "a#1", "b"])
        assert bag.objects == ("a", "a#1", "b") and bag.labels == ("x", "x", "y")

    def test_observed_values_follow_domain_order(self):
        assert tiny(rows=(("l",), ("s",), ("l",))).observed_values("size") == ("s", "l")


class TestCSV:
    def test_tennis_loads(self, tennis):
        assert len(tennis) == 14 and tennis.attributes == ("overlook", "temperature", "humidity", "windy")
        assert tennis.labels.count("yes") == 9
        assert tennis.value("13", "overlook") == "rainy"

    def test_roundtrip(self, tennis, tmp_path):
        from treefca.datasets import data_path

        spec = load_domain_spec(data_path("tennis_domains.json"))
        p = tmp_path / "t.csv"
        save_csv(tennis, p, label_column="play")
        assert load_csv(p, spec) == tennis

    def test_missing_cells_and_empty_file(self, tmp_path):
        spec = load_domain_spec({"attributes": [{"name": "size", "values": ["s", "m", "l"]}]})
        p = tmp_path / "m.csv"
        p.write_text("size\ns\n\nl\n,\n")
        ctx = load_csv(p, spec)
        assert len(ctx) == 3 and not ctx.complete
        e = tmp_path / "e.csv"
        e.write_text("")
        assert len(load_csv(e, spec)) == 0

    def test_header_without_attribute(self, tmp_path):
        spec = load_domain_spec({"attributes": [{"name": "size", "values": ["s"]}]})
        p = tmp_path / "h.csv"
        p.write_text("weight\n1\n")
        with pytest.raises(ParseError):
            load_csv(p, spec)

    def test_bad_token_is_rejected(self, tmp_path):
        spec = load_domain_spec({"attributes": [{"name": "size", "values": ["s"]}]})
        p = tmp_path / "b.csv"
        p.write_text("size\ns\nq\n")
        with pytest.raises(DomainViolation):
            load_csv(p, spec)

    def test_car_data(self):
        from treefca.datasets import load_car

        car = load_car()
        assert len(car) == 1728 and car.complete
        assert car.labels.count("positive") == 1210
        assert len({tuple(r) for r in car.codes.tolist()}) == 1728


class TestScaling:
    def test_tennis_interordinal_matches_reference_table(self, tennis):
        ctx = interordinal_scale_context(tennis)
        names = [p.label for p in ctx.attributes]
        assert sorted(names) == sorted(SCALED_COLUMNS)
        expected = parse_rows(SCALED_ROWS, SCALED_COLUMNS)
        for i, g in enumerate(ctx.objects):
            assert {ctx.attributes[a].label for a in ctx.row(i)} == expected[g]

    def test_tennis_108(self, tennis):
        assert count_concepts(interordinal_scale_context(tennis)) == 108

    def test_full_columns_dropped(self):
        ctx = tiny(rows=(("s",), ("m",), ("m",)))
        k = interordinal_scale_context(ctx)
        assert Predicate("size", LEQ, "m") not in k.attributes
        assert Predicate("size", GEQ, "s") not in k.attributes
        assert len(k.attributes) == 2

    def test_incomplete_rejected(self):
        with pytest.raises(IncompleteContext):
            interordinal_scale_context(tiny())

    def test_one_dimensional_scales(self):
        inter = interordinal_scale(SIZE)
        assert inter.n_attributes == 6
        assert len(enumerate_concepts(inter)) == 7  # 6 intervals plus the empty one
        nom = nominal_scale(SIZE)
        assert len(enumerate_concepts(nom)) == 5

    def test_plain_scale_with_interordinal_scales_equals_direct(self, tennis):
        direct = interordinal_scale_context(tennis)
        plain = plain_scale(tennis, {d.name: interordinal_scale(d) for d in tennis.domains})
        assert count_concepts(plain) == count_concepts(direct)
        assert plain.attributes[0] == ("overlook", Predicate("overlook", LEQ, "rainy"))

    def test_plain_scale_domain_violation(self):
        narrow = nominal_scale(ValueDomain("size", ["s", "m"]))
        with pytest.raises(ScaleDomainViolation):
            plain_scale(tiny(rows=(("s",), ("l",), ("m",))), {"size": narrow})

    def test_plain_scale_clarify(self):
        ctx = tiny(rows=(("s",), ("s",), ("s",)))
        out = plain_scale(ctx, {"size": interordinal_scale(SIZE)}, clarify=True)
        assert out.n_attributes < 6

    def test_logical_scale_nice_weather(self, tennis):
        nice = equals("temperature", "mild") & ~atom("windy", GEQ, "True")
        k = logical_scale(tennis, [LogicalFormula("nice", nice)])
        assert {k.objects[g] for g in k.column(0)} == {"3", "7", "9"}

    def test_logical_scale_or_and_errors(self, tennis):
        f = atom("overlook", GEQ, "sunny") | atom("humidity", LEQ, "normal")
        k = logical_scale(tennis, [LogicalFormula("f", f)])
        mask = [tennis.value(g, "overlook") == "sunny" or tennis.value(g, "humidity") == "normal" for g in tennis.objects]
        assert [g in {k.objects[i] for i in k.column(0)} for g in tennis.objects] == mask
        with pytest.raises(UnknownAttribute):
            logical_scale(tennis, [LogicalFormula("x", atom("colour", LEQ, "red"))])
        with pytest.raises(IncompleteContext):
            logical_scale(tiny(), [LogicalFormula("x", atom("size", LEQ, "s"))])

    def test_predicate_context_columns(self, tennis):
        preds = interordinal_predicates(tennis)
        assert len(preds) == 20
        k = predicate_context(tennis, preds[:3], objects=["0", "13"])
        assert k.objects == ("0", "13") and k.n_attributes == 3
        holds = np.array([[satisfies(tennis, g, p) for p in preds[:3]] for g in ("0", "13")])
        assert (k.to_matrix() == holds).all()
