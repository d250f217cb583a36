from __future__ import annotations

import pytest

from injector_helpers import make_selection, sample_set
from snappattern.injector import (
    ConflictError,
    NotFoundError,
    NotInjectedError,
    PatternKind,
    apply_plan,
    plan_injection,
    plan_removal,
    semantic_model,
    validate_selection,
)
from snappattern.injector.model import LABEL_TARGET, DEFAULT_PATTERN_NAMESPACE
from snappattern.proxy.policies import CacheAsidePolicy, CircuitBreakerPolicy

ALL_KINDS = [PatternKind.CB, PatternKind.CA, PatternKind.RC, PatternKind.GO, PatternKind.ARR]


class TestPlanInjection:
    def test_cb_on_filter_service_one_rename_three_creations(self):
        plan = plan_injection(sample_set(), make_selection(PatternKind.CB, "filter-service"))
        assert len(plan.mutations) == 1
        assert len(plan.creations) == 3
        rename = plan.mutations[0]
        assert rename.old.name == "filter-service"
        assert rename.new.name == "filter-service-original"

    def test_go_on_coordinator_includes_ingress(self):
        plan = plan_injection(sample_set(),
                              make_selection(PatternKind.GO, "coordinator-service"))
        kinds = sorted(c.kind for c in plan.creations)
        assert kinds == ["ConfigMap", "Deployment", "Ingress", "Service"]

    def test_ca_http_configmap_upstream_points_at_renamed_service(self):
        plan = plan_injection(sample_set(),
                              make_selection(PatternKind.CA, "data-product-service"))
        configmap = next(c for c in plan.creations if c.kind == "ConfigMap")
        policy_text = configmap.document["data"]["policy.yaml"]
        assert "data-product-service-original" in policy_text

    def test_missing_target_raises_not_found(self):
        with pytest.raises(NotFoundError):
            plan_injection(sample_set(), make_selection(PatternKind.CB, "ghost-service"))

    def test_renamed_name_already_taken_conflicts(self):
        manifests = sample_set()
        injected = apply_plan(manifests,
                              plan_injection(manifests,
                                             make_selection(PatternKind.CB, "filter-service")))
        with pytest.raises(ConflictError):
            plan_injection(injected, make_selection(PatternKind.CA, "filter-service"))

    def test_workload_resources_live_in_pattern_namespace(self):
        plan = plan_injection(sample_set(), make_selection(PatternKind.RC, "data-product-service"))
        by_kind = {c.kind: c for c in plan.creations}
        assert by_kind["Deployment"].namespace == DEFAULT_PATTERN_NAMESPACE
        assert by_kind["ConfigMap"].namespace == DEFAULT_PATTERN_NAMESPACE
        assert by_kind["Service"].namespace == "pipeline"
        assert by_kind["Service"].name == "data-product-service"

    def test_every_created_resource_carries_both_labels(self):
        plan = plan_injection(sample_set(), make_selection(PatternKind.ARR, "format-service"))
        for creation in plan.creations:
            labels = creation.document["metadata"]["labels"]
            assert labels["snappattern/pattern"] == "async_request_reply"
            assert labels["snappattern/target"] == "format-service"


class TestDnsTransparency:
    @pytest.mark.parametrize("kind", ALL_KINDS, ids=lambda k: k.name)
    def test_pipeline_service_name_set_preserved(self, kind):
        manifests = sample_set()
        before = manifests.service_names("pipeline")
        injected = apply_plan(manifests, plan_injection(
            manifests, make_selection(kind, "data-product-service")))
        assert injected.service_names("pipeline") == before


class TestRoundTrip:
    @pytest.mark.parametrize("kind", ALL_KINDS, ids=lambda k: k.name)
    def test_removal_recovers_original_semantic_model(self, kind):
        manifests = sample_set()
        original = semantic_model(manifests)
        selection = make_selection(kind, "filter-service")

        injected = apply_plan(manifests, plan_injection(manifests, selection))
        assert semantic_model(injected) != original

        removed = apply_plan(injected, plan_removal(injected, selection))
        assert semantic_model(removed) == original

    def test_sql_variant_round_trip(self):
        manifests = sample_set()
        original = semantic_model(manifests)
        selection = make_selection(PatternKind.CA, "data-product-service", variant="sql")
        injected = apply_plan(manifests, plan_injection(manifests, selection))
        removed = apply_plan(injected, plan_removal(injected, selection))
        assert semantic_model(removed) == original

    def test_removal_on_clean_set_raises(self):
        with pytest.raises(NotInjectedError):
            plan_removal(sample_set(), make_selection(PatternKind.CB, "filter-service"))

    def test_removal_depends_only_on_target_label(self):
        manifests = sample_set()
        selection = make_selection(PatternKind.CB, "filter-service")
        injected = apply_plan(manifests, plan_injection(manifests, selection))
        plan = plan_removal(injected, selection)
        expected = {ref for ref, _doc in injected.labelled(LABEL_TARGET, "filter-service")}
        assert set(plan.deletions) == expected

    def test_removal_leaves_unrelated_documents_untouched(self):
        manifests = sample_set()
        selection = make_selection(PatternKind.GO, "coordinator-service")
        injected = apply_plan(manifests, plan_injection(manifests, selection))
        removed = apply_plan(injected, plan_removal(injected, selection))
        target_names = {"coordinator-service", "coordinator-service-original"}
        before = [d for d in manifests.documents
                  if d["metadata"]["name"] not in target_names]
        after = [d for d in removed.documents
                 if d["metadata"]["name"] not in target_names]
        assert before == after


class TestValidateSelection:
    def test_unknown_service_reports_target_not_found(self):
        issues = validate_selection(sample_set(), make_selection(PatternKind.CB, "nope"))
        assert [i.code for i in issues] == ["TARGET_NOT_FOUND"]

    def test_negative_ttl_reports_param_range(self):
        selection = make_selection(PatternKind.CA, "data-product-service",
                                   parameters=CacheAsidePolicy(ttl_seconds=-5))
        issues = validate_selection(sample_set(), selection)
        assert [i.code for i in issues] == ["PARAM_RANGE"]

    def test_unconventional_pattern_service_pairing_is_allowed(self):
        selection = make_selection(PatternKind.CB, "data-product-service",
                                   parameters=CircuitBreakerPolicy())
        assert validate_selection(sample_set(), selection) == []

    def test_bad_namespace_reported(self):
        selection = make_selection(PatternKind.CB, "filter-service",
                                   pattern_namespace="Not_Valid!")
        issues = validate_selection(sample_set(), selection)
        assert any(i.code == "NAMESPACE_INVALID" for i in issues)

    def test_mismatched_parameter_type_reported(self):
        selection = make_selection(PatternKind.GO, "coordinator-service",
                                   parameters=CacheAsidePolicy())
        issues = validate_selection(sample_set(), selection)
        assert any(i.code == "PARAM_TYPE" for i in issues)
