"""
Occupation registry tests
"""
import pytest

from app.core.errors import DuplicateOccupation, MalformedRow, MissingCategory, MissingReference, MissingWeight
from app.schemas.lexicon import ClassificationSystem, ExclusionKind, GenderShare, IssueKind, IssueSeverity
from app.schemas.scoring import ReferenceKind
from app.services.lexicon import (
    crosswalk_candidates,
    employment_weight,
    load_registry,
    resolve_reference,
    sector_coverage,
    validate_registry,
)

OCC_HEADER = "id,name_source,name_gloss,feor_code,soc_code,isco_code,sector_id,excluded_kind,excluded_note\n"
CAT_HEADER = "code,name,female_pct,male_pct,employment_count\n"
CROSS_HEADER = "feor_code,isco_code,soc_code,override\n"


@pytest.fixture
def small_inputs(write_csv):
    """Two-occupation registry builder; pass overrides per file"""

    def _build(occupations=None, feor=None, soc=None, crosswalk=None):
        return (
            write_csv("occupations.csv", OCC_HEADER + (occupations if occupations is not None else (
                "a,statisztikus,statistician,2112,,,science,,\n"
                "b,orvos,doctor,2211,,,healthcare,,\n"
            ))),
            (
                write_csv("feor.csv", CAT_HEADER + (feor if feor is not None else (
                    "2112,Statisztikusok,73,27,3200\n"
                    "2211,Orvosok,50,50,11000\n"
                ))),
                write_csv("soc.csv", CAT_HEADER + (soc if soc is not None else (
                    "15-2041,Statisticians,45,55,60000\n"
                    "29-1062,Family practitioners,39,61,130000\n"
                ))),
            ),
            write_csv("crosswalk.csv", CROSS_HEADER + (crosswalk if crosswalk is not None else (
                "2112,2120,15-2041,0\n"
                "2211,2211,29-1062,0\n"
            ))),
        )

    return _build


class TestLoadRegistry:
    def test_demo_fixture_counts(self, registry):
        assert len(registry.occupations) == 30
        assert len(registry.scoreable()) == 26

    def test_statistician_carries_feor_share(self, registry):
        statistician = registry.get("o01")
        category = registry.category_of(statistician, ClassificationSystem.FEOR)
        assert category.share.female == pytest.approx(0.73)
        assert category.employment_count == 3200

    def test_exclusions_parsed(self, registry):
        kinds = {o.id: o.excluded.kind for o in registry.occupations if o.excluded}
        assert kinds == {
            "o27": ExclusionKind.GENDER_MARKED_NAME,
            "o28": ExclusionKind.GENDER_MARKED_NAME,
            "o29": ExclusionKind.RELIGIOUS_OCCUPATION,
            "o30": ExclusionKind.NOT_WELL_KNOWN,
        }

    def test_soc_resolved_through_crosswalk(self, registry):
        assert registry.get("o01").soc_code == "15-2041"
        assert registry.get("o01").isco_code == "2120"

    def test_override_replaces_official_mapping(self, registry):
        surgeon = registry.get("o25")
        assert surgeon.soc_code == "29-1067"
        assert surgeon.soc_override is True

    def test_explicit_soc_for_one_to_many_feor(self, registry):
        assert registry.get("o11").soc_code == "39-5012"
        assert registry.get("o12").soc_code == "39-5011"
        assert registry.get("o11").isco_code == "5141"

    def test_military_has_no_soc(self, registry):
        assert registry.get("o23").soc_code is None
        assert registry.get("o24").soc_code is None

    def test_suppressed_category_has_no_share(self, registry):
        assert registry.soc["27-2030"].suppressed
        assert registry.soc["27-2030"].employment_count is None

    def test_members_follow_occupations(self, registry):
        assert registry.feor["2725"].members == ("o02", "o03")
        assert registry.feor["5211"].members == ("o11", "o12")

    def test_codes_with_leading_zero_kept(self, registry):
        assert "0110" in registry.feor

    def test_empty_occupations_file(self, small_inputs):
        occupations, categories, crosswalk = small_inputs(occupations="")
        registry = load_registry(occupations, categories, crosswalk)
        assert registry.occupations == ()

    def test_unknown_feor_code(self, small_inputs):
        occupations, categories, crosswalk = small_inputs(occupations="a,x,,9999,,,science,,\n")
        with pytest.raises(MissingCategory) as exc:
            load_registry(occupations, categories, crosswalk)
        assert exc.value.context["code"] == "9999"

    def test_unknown_explicit_soc_code(self, small_inputs):
        occupations, categories, crosswalk = small_inputs(occupations="a,x,,2112,99-9999,,science,,\n")
        with pytest.raises(MissingCategory):
            load_registry(occupations, categories, crosswalk)

    def test_duplicate_id(self, small_inputs):
        occupations, categories, crosswalk = small_inputs(occupations=(
            "a,statisztikus,,2112,,,science,,\n"
            "a,orvos,,2211,,,healthcare,,\n"
        ))
        with pytest.raises(DuplicateOccupation):
            load_registry(occupations, categories, crosswalk)

    def test_duplicate_name(self, small_inputs):
        occupations, categories, crosswalk = small_inputs(occupations=(
            "a,orvos,,2112,,,science,,\n"
            "b,orvos,,2211,,,healthcare,,\n"
        ))
        with pytest.raises(DuplicateOccupation):
            load_registry(occupations, categories, crosswalk)

    def test_half_blank_share_is_malformed(self, small_inputs):
        occupations, categories, crosswalk = small_inputs(feor="2112,Statisztikusok,73,,3200\n2211,Orvosok,50,50,11000\n")
        with pytest.raises(MalformedRow) as exc:
            load_registry(occupations, categories, crosswalk)
        assert exc.value.line == 2

    def test_percent_out_of_range(self, small_inputs):
        occupations, categories, crosswalk = small_inputs(feor="2112,Statisztikusok,173,27,3200\n2211,Orvosok,50,50,11000\n")
        with pytest.raises(MalformedRow):
            load_registry(occupations, categories, crosswalk)

    def test_missing_column(self, write_csv, small_inputs):
        _, categories, crosswalk = small_inputs()
        occupations = write_csv("bad.csv", "id,name_source\na,orvos\n")
        with pytest.raises(MalformedRow) as exc:
            load_registry(occupations, categories, crosswalk)
        assert exc.value.line == 1

    def test_unknown_exclusion_kind(self, small_inputs):
        occupations, categories, crosswalk = small_inputs(occupations="a,x,,2112,,,science,Whatever,\n")
        with pytest.raises(MalformedRow):
            load_registry(occupations, categories, crosswalk)

    def test_bad_override_flag(self, small_inputs):
        occupations, categories, crosswalk = small_inputs(crosswalk="2112,2120,15-2041,yes\n")
        with pytest.raises(MalformedRow):
            load_registry(occupations, categories, crosswalk)


class TestCrosswalkCandidates:
    def test_overrides_win(self, registry):
        candidates = crosswalk_candidates("2212", registry.crosswalk)
        assert [c.soc_code for c in candidates] == ["29-1067"]

    def test_one_to_many(self, registry):
        candidates = crosswalk_candidates("5211", registry.crosswalk)
        assert sorted(c.soc_code for c in candidates) == ["39-5011", "39-5012"]

    def test_unmapped(self, registry):
        assert crosswalk_candidates("0110", registry.crosswalk) == []


class TestValidateRegistry:
    def test_clean_fixture(self, registry):
        assert validate_registry(registry) == []

    def test_share_sum_violation(self, small_inputs):
        occupations, categories, crosswalk = small_inputs(feor="2112,Statisztikusok,60,50,3200\n2211,Orvosok,50,50,11000\n")
        issues = validate_registry(load_registry(occupations, categories, crosswalk))
        assert [i.kind for i in issues] == [IssueKind.SHARE_SUM_VIOLATION]
        assert issues[0].subject == "FEOR:2112"

    def test_one_dangling_crosswalk_row(self, small_inputs):
        occupations, categories, crosswalk = small_inputs(crosswalk=(
            "2112,2120,15-2041,0\n"
            "2211,2211,29-1062,0\n"
            "2211,2211,29-9999,0\n"
        ))
        issues = validate_registry(load_registry(occupations, categories, crosswalk))
        kinds = [i.kind for i in issues]
        assert kinds.count(IssueKind.DANGLING_CROSSWALK) == 1

    def test_ambiguous_crosswalk(self, small_inputs):
        occupations, categories, crosswalk = small_inputs(crosswalk=(
            "2112,2120,15-2041,0\n"
            "2211,2211,29-1062,0\n"
            "2211,2211,15-2041,0\n"
        ))
        registry = load_registry(occupations, categories, crosswalk)
        assert registry.get("b").soc_code is None
        issues = validate_registry(registry)
        assert [(i.kind, i.subject) for i in issues] == [(IssueKind.AMBIGUOUS_CROSSWALK, "b")]

    def test_missing_share_for_scoreable_occupation(self, small_inputs):
        occupations, categories, crosswalk = small_inputs(feor="2112,Statisztikusok,,,\n2211,Orvosok,50,50,11000\n")
        issues = validate_registry(load_registry(occupations, categories, crosswalk))
        assert [i.kind for i in issues] == [IssueKind.MISSING_SHARE]

    def test_missing_weight(self, small_inputs):
        occupations, categories, crosswalk = small_inputs(soc="15-2041,Statisticians,45,55,\n29-1062,Family practitioners,39,61,130000\n")
        issues = validate_registry(load_registry(occupations, categories, crosswalk))
        assert [(i.kind, i.subject) for i in issues] == [(IssueKind.MISSING_WEIGHT, "a")]
        assert issues[0].severity == IssueSeverity.WARNING

    def test_severity(self, small_inputs):
        occupations, categories, crosswalk = small_inputs(
            feor="2112,Statisztikusok,60,50,3200\n2211,Orvosok,50,50,11000\n",
            crosswalk="2112,2120,15-2041,0\n2211,2211,29-1062,0\n2211,2211,15-2041,0\n",
        )
        issues = validate_registry(load_registry(occupations, categories, crosswalk))
        assert {i.kind: i.fatal for i in issues} == {
            IssueKind.AMBIGUOUS_CROSSWALK: False,
            IssueKind.SHARE_SUM_VIOLATION: True,
        }

    def test_unknown_sector(self, write_csv, small_inputs):
        occupations, categories, crosswalk = small_inputs()
        sectors = write_csv("sectors.csv", "sector_id,name\nscience,Tudomány\n")
        issues = validate_registry(load_registry(occupations, categories, crosswalk, sectors))
        assert [(i.kind, i.subject) for i in issues] == [(IssueKind.UNKNOWN_SECTOR, "b")]


class TestResolveReference:
    def test_source_covers_military(self, registry):
        resolved = resolve_reference(registry, ReferenceKind.SOURCE_STATS)
        assert resolved.coverage == 26
        assert "o23" in resolved.shares
        assert resolved.omitted == {}

    def test_target_omits_suppressed_and_unlinked(self, registry):
        resolved = resolve_reference(registry, ReferenceKind.TARGET_STATS)
        assert resolved.coverage == 21
        assert resolved.omitted == {
            "o02": "suppressed",
            "o03": "suppressed",
            "o16": "suppressed",
            "o23": "unlinked",
            "o24": "unlinked",
        }

    def test_excluded_never_resolved(self, registry):
        resolved = resolve_reference(registry, ReferenceKind.SOURCE_STATS)
        assert not {"o27", "o28", "o29", "o30"} & set(resolved.shares)

    def test_single_entry(self, small_inputs):
        occupations, categories, crosswalk = small_inputs(occupations="b,orvos,,2211,,,healthcare,,\n")
        resolved = resolve_reference(load_registry(occupations, categories, crosswalk), ReferenceKind.SOURCE_STATS)
        assert resolved.shares == {"b": GenderShare(female=0.5, male=0.5)}

    def test_perception_not_from_registry(self, registry):
        with pytest.raises(MissingReference):
            resolve_reference(registry, ReferenceKind.PERCEPTION)


class TestWeights:
    def test_shared_category_split_evenly(self, registry):
        assert employment_weight(registry, registry.get("o02"), ClassificationSystem.FEOR) == 900
        assert employment_weight(registry, registry.get("o11"), ClassificationSystem.FEOR) == 15000

    def test_excluded_member_takes_no_share(self, small_inputs):
        occupations, categories, crosswalk = small_inputs(occupations=(
            "a,statisztikus,statistician,2112,,,science,,\n"
            "b,orvos,doctor,2211,,,healthcare,,\n"
            "c,orvosnő,woman doctor,2211,,,healthcare,GenderMarkedName,\n"
        ))
        registry = load_registry(occupations, categories, crosswalk)
        assert employment_weight(registry, registry.get("b"), ClassificationSystem.FEOR) == 11000
        assert employment_weight(registry, registry.get("b"), ClassificationSystem.SOC) == 130000

    def test_unlinked_has_no_weight(self, registry):
        with pytest.raises(MissingWeight):
            employment_weight(registry, registry.get("o23"), ClassificationSystem.SOC)

    def test_sector_coverage(self, registry):
        rows = sector_coverage(registry, [resolve_reference(registry, ReferenceKind.TARGET_STATS)])
        military = next(r for r in rows if r["sector_id"] == "military")
        assert military == {"sector_id": "military", "reference": "target", "n_occupations": 0, "n_total": 2}
