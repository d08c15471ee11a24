"""HTTP API for the review console and dashboards, under /v1.

The service owns a single Store (one writer process); review submission is
idempotent per client-supplied request id. Error responses carry a
structured body: {"error": {"code": ..., "message": ...}}.
"""
from __future__ import annotations

from fastapi import FastAPI, HTTPException, Query
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from .agreement import annotator_matrix, pair_agreement, task_agreement
from .config import PipelineConfig
from .metrics import metrics_report
from .model import Review, Span, SpanAnnotation
from .rca import rca_report
from .store import Store, annotations_to_json
from .workflow import (
    ERROR_CATEGORIES,
    InvalidGroundTruth,
    InvalidReview,
    InvalidState,
    UnknownSubmission,
    phase_report,
    quality_score,
)


class AnnotationIn(BaseModel):
    start: int
    end: int
    type: str
    text: str

    def to_domain(self) -> SpanAnnotation:
        return SpanAnnotation(Span(self.start, self.end), self.type, self.text)


class ReviewIn(BaseModel):
    request_id: str = Field(min_length=1)
    reviewer_id: str = Field(min_length=1)
    chosen_submission_id: str
    verdict: str
    error_categories: list[str] = []
    ground_truth: list[AnnotationIn] = []


def error_body(code: str, message: str) -> dict:
    return {"error": {"code": code, "message": message}}


def http_error(status: int, code: str, message: str) -> HTTPException:
    return HTTPException(status_code=status, detail=error_body(code, message))


def create_app(store: Store, config: PipelineConfig | None = None) -> FastAPI:
    config = config or PipelineConfig()
    app = FastAPI(title="piiqa", version="1.0")

    @app.exception_handler(HTTPException)
    async def handle_http_error(_request, exc: HTTPException):
        detail = exc.detail if isinstance(exc.detail, dict) else error_body(
            "error", str(exc.detail))
        return JSONResponse(status_code=exc.status_code, content=detail)

    def get_task_or_404(task_id: str):
        task = store.corpus.tasks.get(task_id)
        if task is None:
            raise http_error(404, "not_found", f"task {task_id} not found")
        return task

    def arbitration_entry(task_id: str) -> dict:
        task = store.corpus.tasks[task_id]
        state = store.states[task_id]
        entered_at = 0
        ira = None
        for transition in state.history:
            if transition.status == "arbitration":
                entered_at = transition.at
                ira = transition.meta.get("ira")
        return {"task_id": task_id, "locale": task.locale, "phase": task.phase,
                "domain": task.domain, "ira": ira, "entered_at": entered_at,
                "submissions": len(store.corpus.submissions[task_id])}

    @app.get("/v1/health")
    def health():
        return {"status": "ok", "tasks": len(store.corpus.tasks)}

    @app.get("/v1/queue")
    def queue(locale: str | None = None, phase: str | None = None,
              page: int = Query(1, ge=1), page_size: int = Query(20, ge=1, le=200)):
        entries = [arbitration_entry(task_id)
                   for task_id, state in store.states.items()
                   if state.status == "arbitration"]
        if locale:
            entries = [e for e in entries if e["locale"] == locale]
        if phase:
            entries = [e for e in entries if e["phase"] == phase]
        entries.sort(key=lambda e: (e["entered_at"], e["task_id"]))
        start = (page - 1) * page_size
        return {"total": len(entries), "page": page, "page_size": page_size,
                "items": entries[start:start + page_size]}

    @app.get("/v1/tasks/{task_id}")
    def get_task(task_id: str):
        task = get_task_or_404(task_id)
        subs = store.corpus.submissions.get(task_id, [])
        breakdowns = []
        for i in range(len(subs)):
            for j in range(i + 1, len(subs)):
                br = pair_agreement(subs[i], subs[j], config.tau)
                breakdowns.append({
                    "submission_a": subs[i].id, "submission_b": subs[j].id,
                    "span_score": br.span_score, "type_score": br.type_score,
                    "text_score": br.text_score, "overall": br.overall})
        gt = store.corpus.ground_truths.get(task_id)
        review = store.corpus.reviews.get(task_id)
        return {
            "id": task.id, "locale": task.locale, "phase": task.phase,
            "domain": task.domain, "prompt": task.prompt,
            "status": store.states[task_id].status,
            "ira": task_agreement(subs, config.tau) if len(subs) >= 2 else None,
            "submissions": [
                {"id": s.id, "annotator_id": s.annotator_id,
                 "annotations": annotations_to_json(s.annotations)} for s in subs],
            "agreement": breakdowns,
            "ground_truth": annotations_to_json(gt.annotations) if gt else None,
            "review": {
                "reviewer_id": review.reviewer_id,
                "chosen_submission_id": review.chosen_submission_id,
                "verdict": review.verdict,
                "error_categories": sorted(review.error_categories),
            } if review else None,
        }

    @app.post("/v1/tasks/{task_id}/review")
    def submit_review(task_id: str, body: ReviewIn):
        task = get_task_or_404(task_id)
        known_task = store.request_index.get(body.request_id)
        if known_task is not None and known_task != task_id:
            raise http_error(409, "conflict",
                             f"request id already used for {known_task}")
        bad = set(body.error_categories) - set(ERROR_CATEGORIES)
        if bad:
            raise http_error(422, "validation", f"unknown categories {sorted(bad)}")
        review = Review(task_id, body.reviewer_id, body.chosen_submission_id,
                        [a.to_domain() for a in body.ground_truth],
                        frozenset(body.error_categories), body.verdict)
        try:
            applied = store.review_task(review, request_id=body.request_id)
        except InvalidState as exc:
            raise http_error(409, "invalid_state", str(exc))
        except UnknownSubmission as exc:
            raise http_error(422, "unknown_submission", str(exc))
        except (InvalidGroundTruth, InvalidReview) as exc:
            raise http_error(422, "validation", str(exc))
        stored = store.corpus.reviews[task_id]
        return {"task_id": task_id, "status": store.states[task_id].status,
                "replayed": not applied,
                "review": {"reviewer_id": stored.reviewer_id,
                           "chosen_submission_id": stored.chosen_submission_id,
                           "verdict": stored.verdict,
                           "error_categories": sorted(stored.error_categories)}}

    @app.get("/v1/dashboards/quality")
    def quality_dashboard():
        annotators = sorted({s.annotator_id
                             for subs in store.corpus.submissions.values()
                             for s in subs})
        rows = []
        for annotator in annotators:
            qs = quality_score(annotator, store.corpus, config.quality_threshold,
                               config.quality_min_reviewed,
                               config.quality_corrected_weight)
            rows.append({"annotator_id": annotator, "score": qs.score,
                         "reviewed_count": qs.reviewed_count,
                         "qualified": qs.qualified})
        return {"threshold": config.quality_threshold, "annotators": rows}

    @app.get("/v1/dashboards/errors")
    def errors_dashboard(phase: str | None = None):
        phases = [phase] if phase else ["pilot", "training", "production"]
        out = {}
        for name in phases:
            report = phase_report(store.corpus, name)
            out[name] = {"reviewed_tasks": report.reviewed_tasks,
                         "verdicts": report.verdict_counts,
                         "categories": report.category_histogram}
        return out

    @app.get("/v1/dashboards/metrics")
    def metrics_dashboard(locale: str | None = None, phase: str | None = None):
        rows = []
        for report in metrics_report(store.corpus, negatives=config.fpr_negatives,
                                     registry=store.registry):
            if locale and report.locale != locale:
                continue
            if phase and report.phase != phase:
                continue
            rows.append({
                "locale": report.locale, "phase": report.phase,
                "recall_fine": report.recall_fine,
                "recall_coarse": report.recall_coarse,
                "fpr_fine": report.fpr_fine, "fpr_coarse": report.fpr_coarse,
                "rows": report.rows, "na_rows": report.na_rows,
                "tp_fine": report.tp_fine, "fn_fine": report.fn_fine,
                "fp": report.fp, "tn": report.tn})
        return {"reports": rows}

    @app.get("/v1/dashboards/agreement")
    def agreement_dashboard():
        matrix = annotator_matrix(store.corpus, config.tau)
        return {"annotators": matrix.annotators, "cells": matrix.to_rows()}

    @app.get("/v1/dashboards/rca")
    def rca_dashboard(phase: str = "production"):
        report = rca_report(store.corpus, phase, tau=config.tau,
                            registry=store.registry)
        return {"window": report.window, "reviewed_tasks": report.reviewed_tasks,
                "categories": report.category_counts,
                "confusions": [{"type_a": p.type_a, "type_b": p.type_b,
                                "count": p.count} for p in report.confusion],
                "affected_locales": report.affected_locales}

    return app
