"""Tests for name resolution and graph accumulation."""

from __future__ import annotations

import random
import time
from typing import Any

import pytest

from taxonomy_owl.builder import (
    ChainLink,
    MatchPolicy,
    Outcome,
    Resolution,
    TaxonomyBuilder,
    TaxonomyGraph,
    accumulate,
    build,
    resolve_accepted,
)
from taxonomy_owl.client import GbifClient
from taxonomy_owl.emitter import emit
from taxonomy_owl.exceptions import (
    GbifNoMatchError,
    GbifTransportError,
    HigherRankMatchError,
    LabelConflictError,
    LowConfidenceError,
    UnresolvableSynonymError,
)
from taxonomy_owl.models import Rank
from taxonomy_owl.names import RawNameEntry, parse_names
from tests.conftest import APIS_MATCH, GOLDEN, NAMES, NO_MATCH, StubTransport, record

APIS_CHAIN = [1, 54, 216, 1457, 4334, 1334757, 1341976]


def _animals() -> list[RawNameEntry]:
    return parse_names((NAMES / "animals.txt").read_text(encoding="utf-8").splitlines())


def _species(key: int, name: str, genus_key: int, **overrides: Any) -> dict[str, Any]:
    body: dict[str, Any] = {
        "usageKey": key,
        "scientificName": name,
        "canonicalName": name,
        "rank": "SPECIES",
        "status": "ACCEPTED",
        "confidence": 99,
        "matchType": "EXACT",
        "kingdom": "Animalia",
        "kingdomKey": 1,
        "genus": name.split()[0],
        "genusKey": genus_key,
        "species": name,
        "speciesKey": key,
        "synonym": False,
    }
    body.update(overrides)
    return body


# ------------------------------------------------------------------ #
# TaxonomyGraph
# ------------------------------------------------------------------ #


class TestTaxonomyGraph:
    def test_add_chain_links_each_to_predecessor(self):
        graph = TaxonomyGraph()
        graph.add_chain([ChainLink(Rank.KINGDOM, "Animalia", 1), ChainLink(Rank.GENUS, "Sus", 7705930)])
        assert graph.edges() == {(7705930, 1)}
        assert graph.roots == {1}
        assert graph.leaves() == {7705930}

    def test_same_label_twice_is_noop(self):
        graph = TaxonomyGraph()
        chain = [ChainLink(Rank.KINGDOM, "Animalia", 1)]
        graph.add_chain(chain)
        graph.add_chain(chain)
        assert len(graph) == 1

    def test_conflicting_label(self):
        graph = TaxonomyGraph()
        graph.add_chain([ChainLink(Rank.KINGDOM, "Animalia", 1)])
        with pytest.raises(LabelConflictError, match="Metazoa"):
            graph.add_chain([ChainLink(Rank.KINGDOM, "Metazoa", 1)])

    def test_conflict_leaves_graph_untouched(self):
        graph = TaxonomyGraph()
        graph.add_chain([ChainLink(Rank.KINGDOM, "Animalia", 1), ChainLink(Rank.GENUS, "Sus", 7705930)])
        before = dict(graph.nodes)
        with pytest.raises(LabelConflictError, match="Sus"):
            graph.add_chain(
                [
                    ChainLink(Rank.KINGDOM, "Animalia", 1),
                    ChainLink(Rank.FAMILY, "Suidae", 9622),
                    ChainLink(Rank.GENUS, "Foo", 7705930),
                ]
            )
        assert graph.nodes == before
        assert 9622 not in graph

    def test_ranks_must_descend(self):
        with pytest.raises(ValueError, match="descend"):
            TaxonomyGraph().add_chain([ChainLink(Rank.GENUS, "Sus", 2), ChainLink(Rank.FAMILY, "Suidae", 3)])

    def test_nearer_parent_wins(self):
        graph = TaxonomyGraph()
        graph.add_chain([ChainLink(Rank.KINGDOM, "Animalia", 1), ChainLink(Rank.GENUS, "Sus", 7705930)])
        graph.add_chain(
            [
                ChainLink(Rank.KINGDOM, "Animalia", 1),
                ChainLink(Rank.FAMILY, "Suidae", 9622),
                ChainLink(Rank.GENUS, "Sus", 7705930),
            ]
        )
        assert graph.nodes[7705930].parent_key == 9622
        graph.check()

    def test_ancestors_nearest_first(self):
        graph = TaxonomyGraph()
        graph.add_chain([ChainLink(r, f"T{k}", k) for r, k in zip((Rank.KINGDOM, Rank.PHYLUM, Rank.CLASS), (1, 2, 3))])
        assert [n.key for n in graph.ancestors(3)] == [2, 1]
        assert graph.children(1) == [2]


# ------------------------------------------------------------------ #
# resolve_accepted
# ------------------------------------------------------------------ #


class TestResolveAccepted:
    def test_apis_chain(self, fixture_client: GbifClient):
        taxon = resolve_accepted(fixture_client.match_name("Apis mellifera"), fixture_client)
        assert [link.key for link in taxon.chain] == APIS_CHAIN
        assert taxon.resolution is Resolution.ACCEPTED
        assert taxon.rank is Rank.SPECIES

    @pytest.mark.parametrize(
        ("name", "key", "label"),
        [
            ("Capra hircus", 2441047, "Capra aegagrus"),
            ("Prochilodus cearensis", 2352151, "Prochilodus brevis"),
            ("Prochilodus scrofa", 2352154, "Prochilodus lineatus"),
            ("Prochilodus margravii", 2352177, "Prochilodus argenteus"),
            ("Colossoma mitrei", 2353269, "Piaractus mesopotamicus"),
        ],
    )
    def test_synonym_replaced(self, fixture_client: GbifClient, name: str, key: int, label: str):
        taxon = resolve_accepted(fixture_client.match_name(name), fixture_client)
        assert taxon.resolution is Resolution.SYNONYM_REPLACED
        assert taxon.accepted_key == key
        assert taxon.accepted_name == label
        assert taxon.chain[-1].key == key

    def test_prochilodus_species_share_genus(self, fixture_client: GbifClient):
        genera = {
            resolve_accepted(fixture_client.match_name(n), fixture_client).chain[-2].key
            for n in ("Prochilodus cearensis", "Prochilodus scrofa", "Prochilodus margravii")
        }
        assert genera == {2352148}

    def test_fuzzy_below_threshold(self, stub: StubTransport, stub_client: GbifClient):
        stub.add_match("Apis melifera", {**APIS_MATCH, "matchType": "FUZZY", "confidence": 85})
        match = stub_client.match_name("Apis melifera")
        with pytest.raises(LowConfidenceError, match="85"):
            resolve_accepted(match, stub_client)
        taxon = resolve_accepted(match, stub_client, MatchPolicy(allow_fuzzy=True))
        assert taxon.resolution is Resolution.FUZZY_MATCHED
        assert taxon.accepted_key == 1341976

    def test_fuzzy_at_threshold_accepted(self, stub: StubTransport, stub_client: GbifClient):
        stub.add_match("Apis melifera", {**APIS_MATCH, "matchType": "FUZZY", "confidence": 90})
        taxon = resolve_accepted(stub_client.match_name("Apis melifera"), stub_client)
        assert taxon.resolution is Resolution.FUZZY_MATCHED

    def test_higher_rank_rejected(self, stub: StubTransport, stub_client: GbifClient):
        stub.add_match(
            "Apis nosuch",
            {
                "usageKey": 1334757,
                "scientificName": "Apis Linnaeus, 1758",
                "canonicalName": "Apis",
                "rank": "GENUS",
                "status": "ACCEPTED",
                "confidence": 95,
                "matchType": "HIGHERRANK",
                "kingdom": "Animalia",
                "kingdomKey": 1,
                "genus": "Apis",
                "genusKey": 1334757,
            },
        )
        with pytest.raises(HigherRankMatchError, match="Genus Apis"):
            resolve_accepted(stub_client.match_name("Apis nosuch"), stub_client)

    def test_synonym_without_accepted_reference(self, stub: StubTransport, stub_client: GbifClient):
        body = _species(99, "Foo bar", 98, status="SYNONYM", synonym=True)
        del body["species"], body["speciesKey"]
        stub.add_match("Foo bar", body)
        with pytest.raises(UnresolvableSynonymError):
            resolve_accepted(stub_client.match_name("Foo bar"), stub_client)

    def test_synonym_of_synonym_followed(self, stub: StubTransport, stub_client: GbifClient):
        stub.add_match("Foo bar", _species(10, "Foo bar", 5, status="SYNONYM", synonym=True, acceptedUsageKey=11))
        stub.add_taxon(11, record(11, "Foo baz", "SPECIES", "SYNONYM", acceptedKey=12))
        stub.add_taxon(12, record(12, "Qux baz", "SPECIES", kingdom="Animalia", kingdomKey=1, genus="Qux", genusKey=6))
        taxon = resolve_accepted(stub_client.match_name("Foo bar"), stub_client)
        assert [link.key for link in taxon.chain] == [1, 6, 12]

    def test_synonym_loop_gives_up(self, stub: StubTransport, stub_client: GbifClient):
        stub.add_match("Foo bar", _species(10, "Foo bar", 5, status="SYNONYM", synonym=True, acceptedUsageKey=11))
        stub.add_taxon(11, record(11, "Foo baz", "SPECIES", "SYNONYM", acceptedKey=12))
        stub.add_taxon(12, record(12, "Foo qux", "SPECIES", "SYNONYM", acceptedKey=11))
        with pytest.raises(UnresolvableSynonymError):
            resolve_accepted(stub_client.match_name("Foo bar"), stub_client)

    def test_missing_accepted_record_uses_match_fields(self, stub: StubTransport, stub_client: GbifClient):
        body = _species(10, "Foo bar", 5, status="SYNONYM", synonym=True, acceptedUsageKey=11)
        body.update(species="Foo baz", speciesKey=11)
        stub.add_match("Foo bar", body)
        stub.add_taxon(11, {}, status=404)
        taxon = resolve_accepted(stub_client.match_name("Foo bar"), stub_client)
        assert [link.key for link in taxon.chain] == [1, 5, 11]
        assert taxon.accepted_name == "Foo baz"

    def test_gap_is_noted(self, stub: StubTransport, stub_client: GbifClient):
        stub.add_match("Foo bar", _species(10, "Foo bar", 5))
        taxon = resolve_accepted(stub_client.match_name("Foo bar"), stub_client)
        assert [link.key for link in taxon.chain] == [1, 5, 10]
        assert taxon.notes == ("backbone classification has no phylum, class, order, family",)


class TestAccumulate:
    def test_records_replaced_names(self, fixture_client: GbifClient):
        graph = TaxonomyGraph()
        accumulate(resolve_accepted(fixture_client.match_name("Capra hircus"), fixture_client), graph)
        assert graph.replaced_names == {2441047: {"Capra hircus"}}


# ------------------------------------------------------------------ #
# TaxonomyBuilder.match
# ------------------------------------------------------------------ #


class TestMatch:
    def test_hybrid_falls_back_to_marker_free_form(self, stub: StubTransport, stub_client: GbifClient):
        stub.add_match("Citrus ×aurantium", NO_MATCH)
        stub.add_match("Citrus aurantium", _species(8077391, "Citrus aurantium", 3190155))
        norm, query, match, _ = TaxonomyBuilder(stub_client).match(RawNameEntry("Citrus x aurantium"))
        assert norm.canonical_text == "Citrus ×aurantium"
        assert query == "Citrus aurantium"
        assert match.usage_key == 8077391

    def test_hybrid_direct_form_first(self, fixture_client: GbifClient):
        _, query, match, _ = TaxonomyBuilder(fixture_client).match(RawNameEntry("Citrus × aurantium"))
        assert query == "Citrus ×aurantium"
        assert match.usage_key == 8077391

    def test_subspecies_falls_back_to_binomial(self, stub: StubTransport, stub_client: GbifClient):
        stub.add_match("Foo bar baz", NO_MATCH)
        stub.add_match("Foo bar", _species(10, "Foo bar", 5))
        _, query, match, notes = TaxonomyBuilder(stub_client).match(RawNameEntry("Foo bar baz"))
        assert query == "Foo bar"
        assert match.usage_key == 10
        assert notes == ("downgraded to species Foo bar",)

    def test_binomial_never_downgraded(self, stub: StubTransport, stub_client: GbifClient):
        stub.add_match("Foo bar", NO_MATCH)
        with pytest.raises(GbifNoMatchError):
            TaxonomyBuilder(stub_client).match(RawNameEntry("Foo bar"))

    def test_recapitalization_noted(self, fixture_client: GbifClient):
        _, query, _, notes = TaxonomyBuilder(fixture_client).match(RawNameEntry("Prochilodus Cearensis"))
        assert query == "Prochilodus cearensis"
        assert notes == ("recapitalized to Prochilodus cearensis",)

    def test_without_normalization_name_is_sent_as_given(self, fixture_client: GbifClient):
        with pytest.raises(GbifNoMatchError):
            TaxonomyBuilder(fixture_client, normalize_names=False).match(RawNameEntry("Prochilodus Cearensis"))


# ------------------------------------------------------------------ #
# build
# ------------------------------------------------------------------ #


class TestBuild:
    def test_animals_outcomes(self, fixture_client: GbifClient):
        graph, report = build(_animals(), fixture_client)
        counts = report.counts
        assert report.ok
        assert counts[Outcome.ACCEPTED] == 7
        assert counts[Outcome.SYNONYM_REPLACED] == 5
        assert counts[Outcome.FUZZY_MATCHED] == 2
        assert len(graph) == 43
        graph.check()

    def test_animals_golden(self, fixture_client: GbifClient):
        graph, _ = build(_animals(), fixture_client)
        assert emit(graph) == (GOLDEN / "animalia.owl").read_text(encoding="utf-8")

    def test_one_kingdom(self, fixture_client: GbifClient):
        graph, _ = build(_animals(), fixture_client)
        assert graph.roots == {1}
        assert [n.key for n in graph.nodes.values() if n.rank is Rank.KINGDOM] == [1]

    def test_corrected_animals_outcomes(self, fixture_client: GbifClient):
        names = parse_names((NAMES / "animals_corrected.txt").read_text(encoding="utf-8").splitlines())
        graph, report = build(names, fixture_client)
        counts = report.counts
        assert len(report) == 14
        assert counts[Outcome.ACCEPTED] == 9
        assert counts[Outcome.SYNONYM_REPLACED] == 5
        assert not counts[Outcome.FUZZY_MATCHED] and report.ok
        assert graph.roots == {1}
        assert emit(graph) == (GOLDEN / "animalia.owl").read_text(encoding="utf-8")

    def test_replaced_synonyms_absent_from_labels(self, fixture_client: GbifClient):
        graph, report = build(_animals(), fixture_client)
        labels = {node.label for node in graph.nodes.values()}
        replaced = set().union(*graph.replaced_names.values())
        assert len(replaced) == 5
        assert not replaced & labels
        synonyms = [e.normalized for e in report.entries if e.outcome is Outcome.SYNONYM_REPLACED]
        assert len(synonyms) == 5
        assert not set(synonyms) & labels

    def test_input_order_does_not_matter(self, fixture_client: GbifClient):
        names = _animals()
        expected = emit(build(names, fixture_client)[0])
        rng = random.Random(7)
        for _ in range(20):
            shuffled = names[:]
            rng.shuffle(shuffled)
            assert emit(build(shuffled, fixture_client, parallelism=3)[0]) == expected

    def test_report_follows_input_order(self, fixture_client: GbifClient):
        names = _animals()
        _, report = build(names, fixture_client)
        assert [e.input_name for e in report.entries] == [n.raw_text for n in names]

    def test_synonym_report_entry(self, fixture_client: GbifClient):
        _, report = build([RawNameEntry("Capra hircus")], fixture_client)
        entry = report.entries[0]
        assert entry.outcome is Outcome.SYNONYM_REPLACED
        assert entry.status == "SYNONYM"
        assert entry.accepted_key == 2441047
        assert "Capra hircus is a synonym of Capra aegagrus" in entry.detail

    def test_failures_do_not_abort(self, fixture_client: GbifClient):
        graph, report = build([RawNameEntry("Zzzz qqq"), RawNameEntry("Apis mellifera"), RawNameEntry("4pis")],
                              fixture_client)
        assert [e.outcome for e in report.entries] == [Outcome.FAILED, Outcome.ACCEPTED, Outcome.FAILED]
        assert report.entries[0].match_type == "NONE"
        assert report.entries[0].status == ""
        assert set(graph.nodes) == set(APIS_CHAIN)

    def test_normalization_pair(self, fixture_client: GbifClient):
        names = [RawNameEntry(n) for n in ("Prochilodus Cearensis", "Prochilodus Scrofa", "Prochilodus Margravii")]
        _, raw = build(names, fixture_client, normalize_names=False)
        graph, fixed = build(names, fixture_client)
        assert all(e.outcome is Outcome.FAILED for e in raw.entries)
        assert all(e.outcome is Outcome.SYNONYM_REPLACED for e in fixed.entries)
        assert {2352151, 2352154, 2352177} <= set(graph.nodes)

    def test_hybrid_synonym_resolves_to_rye(self, fixture_client: GbifClient):
        graph, report = build([RawNameEntry("Triticum × Secale")], fixture_client)
        assert report.entries[0].outcome is Outcome.SYNONYM_REPLACED
        assert report.entries[0].accepted_key == 2706352
        assert [n.key for n in graph.ordered()] == [6, 7707728, 196, 1369, 3073, 2706345, 2706352]

    def test_label_conflict_fails_later_name(self, stub: StubTransport, stub_client: GbifClient):
        stub.add_match("Apis mellifera", APIS_MATCH)
        stub.add_match("Bombus terrestris", {**_species(1340278, "Bombus terrestris", 1340271), "kingdom": "Metazoa"})
        graph, report = build([RawNameEntry("Apis mellifera"), RawNameEntry("Bombus terrestris")], stub_client,
                              parallelism=1)
        assert report.entries[0].outcome is Outcome.ACCEPTED
        assert report.entries[1].outcome is Outcome.FAILED
        assert "Metazoa" in report.entries[1].detail
        assert graph.nodes[1].label == "Animalia"

    def test_failed_name_leaves_no_nodes(self, stub: StubTransport, stub_client: GbifClient):
        stub.add_match("Apis mellifera", APIS_MATCH)
        stub.add_match("Foo bar", _species(1341976, "Foo bar", 999, genus="Foo"))
        graph, report = build([RawNameEntry("Apis mellifera"), RawNameEntry("Foo bar")], stub_client, parallelism=1)
        assert [e.outcome for e in report.entries] == [Outcome.ACCEPTED, Outcome.FAILED]
        assert "Foo bar" in report.entries[1].detail
        assert set(graph.nodes) == set(APIS_CHAIN)
        assert graph.nodes[1341976].parent_key == 1334757

    def test_no_response_at_all_raises(self, stub_client: GbifClient):
        with pytest.raises(GbifTransportError, match="any of 2 names"):
            build([RawNameEntry("Apis mellifera"), RawNameEntry("Bos taurus")], stub_client)

    def test_one_response_keeps_transport_failures_per_name(self, stub: StubTransport, stub_client: GbifClient):
        stub.add_match("Apis mellifera", APIS_MATCH)
        graph, report = build([RawNameEntry("Apis mellifera"), RawNameEntry("Bos taurus")], stub_client)
        assert [e.outcome for e in report.entries] == [Outcome.ACCEPTED, Outcome.FAILED]
        assert "no stubbed response" in report.entries[1].detail
        assert set(graph.nodes) == set(APIS_CHAIN)

    def test_empty_input(self, fixture_client: GbifClient):
        with pytest.raises(ValueError):
            build([], fixture_client)

    def test_parallelism_validated(self, fixture_client: GbifClient):
        with pytest.raises(ValueError):
            TaxonomyBuilder(fixture_client, parallelism=0)


class TestThroughput:
    class SlowStub(StubTransport):
        def fetch(self, request_key: str):  # type: ignore[no-untyped-def]
            time.sleep(0.002)
            return super().fetch(request_key)

    @staticmethod
    def _corpus(stub: StubTransport, size: int) -> list[RawNameEntry]:
        names = []
        for i in range(size):
            epithet = "sp" + "".join(chr(97 + int(d)) for d in str(i))
            name = f"Genus{chr(97 + i % 7)} {epithet}"
            stub.add_match(name, _species(100000 + i, name, 5000 + i % 7))
            names.append(RawNameEntry(name))
        return names

    def test_near_linear(self):
        stub = self.SlowStub()
        corpus = self._corpus(stub, 74)
        client = GbifClient(transport=stub)
        per_name: dict[int, float] = {}
        for size in (10, 30, 74):
            stub.calls.clear()
            start = time.perf_counter()
            graph, report = build(corpus[:size], client, parallelism=4)
            per_name[size] = (time.perf_counter() - start) / size
            assert report.ok
            assert len(stub.calls) == size
            assert len(graph) == 1 + 7 + size
        assert per_name[74] <= per_name[10] * 1.5 + 0.002
