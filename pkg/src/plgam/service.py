"""Interactive editing service: inspect series and shapes, stage weight edits
and constraints, retrain, export/import models.

Mutations are serialized per model; retraining runs on a worker thread with a
job-state machine (idle | running | failed).  Sessions (weights, constraints,
revision, trained model) are persisted under the data directory and survive
restarts.
"""

from __future__ import annotations

import json
import threading
import uuid
from pathlib import Path
from typing import Optional

import numpy as np
from fastapi import FastAPI, HTTPException, Query
from fastapi.responses import Response
from pydantic import BaseModel

from .constraints import ConstraintSpec, KINDS
from .dataset import Dataset, load_csv
from .errors import PlgamError, ValidationError
from .gam import GamModel, TrainConfig, load_model, save_model, train
from .report import density_profile


class DatasetUpload(BaseModel):
    csv_text: str
    target_column: str
    weight_column: Optional[str] = None
    id_column: Optional[str] = None


class ModelRequest(BaseModel):
    dataset_id: str
    config: dict = {}


class WeightEdit(BaseModel):
    op: str                      # "increase" | "decrease"
    start: Optional[int] = None  # [start, end) window ...
    end: Optional[int] = None
    rows: Optional[list[int]] = None  # ... or an explicit list


class ConstraintRequest(BaseModel):
    feature: str | int
    kind: str
    range: list[float]


class ImportRequest(BaseModel):
    model: dict
    dataset_id: Optional[str] = None


def _dataset_to_doc(d: Dataset) -> dict:
    return {"features": d.features.tolist(), "target": d.target.tolist(),
            "weights": d.weights.tolist(), "feature_names": list(d.feature_names),
            "row_ids": list(d.row_ids) if d.row_ids is not None else None}


def _dataset_from_doc(doc: dict) -> Dataset:
    return Dataset(np.array(doc["features"]), np.array(doc["target"]),
                   np.array(doc["weights"]), tuple(doc["feature_names"]),
                   tuple(doc["row_ids"]) if doc["row_ids"] is not None else None)


class ModelSession:
    """Mutable per-model state guarded by a lock; single retrain in flight."""

    def __init__(self, model_id: str, dataset_id: str, dataset: Dataset,
                 config: TrainConfig, store: "Store"):
        self.model_id = model_id
        self.dataset_id = dataset_id
        self.dataset = dataset            # carries the current (edited) weights
        self.config = config
        self.store = store
        self.model: Optional[GamModel] = None
        self.constraints: list[ConstraintSpec] = []
        self.revision = 0
        self.state = "running"            # idle | running | failed
        self.error: Optional[str] = None
        self.lock = threading.Lock()

    # -- persistence --

    def persist(self):
        doc = {
            "model_id": self.model_id,
            "dataset_id": self.dataset_id,
            "config": self.config.to_dict(),
            "weights": self.dataset.weights.tolist(),
            "constraints": [c.to_dict() for c in self.constraints],
            "revision": self.revision,
            "state": self.state if self.state != "running" else "idle",
            "error": self.error,
        }
        path = self.store.model_dir(self.model_id) / "session.json"
        path.write_text(json.dumps(doc))
        if self.model is not None:
            (self.store.model_dir(self.model_id) / "model.json").write_bytes(
                save_model(self.model))

    # -- training --

    def start_retrain(self) -> bool:
        """Kick off a retrain thread; False when one is already running."""
        with self.lock:
            if self.state == "running":
                return False
            self.state = "running"
            self.error = None
        threading.Thread(target=self._run_training, daemon=True).start()
        return True

    def _run_training(self):
        hook = self.store.train_hook
        if hook is not None:
            hook(self)
        try:
            model = train(self.dataset, self.config, list(self.constraints))
        except Exception as e:  # surfaced via job state, never crashes the worker
            with self.lock:
                self.state = "failed"
                self.error = str(e)
            self.persist()
            return
        with self.lock:
            self.model = model
            self.state = "idle"
            self.revision += 1
        self.persist()

    def require_idle(self):
        if self.state == "running":
            raise HTTPException(status_code=409, detail="retrain in progress")
        if self.model is None:
            raise HTTPException(status_code=409, detail=f"model not trained: {self.error}")


class Store:
    """All sessions and datasets, backed by a data directory."""

    def __init__(self, data_dir: Path, default_seed: int = 0):
        self.data_dir = Path(data_dir)
        self.default_seed = default_seed
        self.datasets: dict[str, Dataset] = {}
        self.sessions: dict[str, ModelSession] = {}
        self.train_hook = None    # test instrumentation: called at retrain start
        (self.data_dir / "datasets").mkdir(parents=True, exist_ok=True)
        (self.data_dir / "models").mkdir(parents=True, exist_ok=True)
        self._load()

    def model_dir(self, model_id: str) -> Path:
        p = self.data_dir / "models" / model_id
        p.mkdir(parents=True, exist_ok=True)
        return p

    def _load(self):
        for p in (self.data_dir / "datasets").glob("*.json"):
            self.datasets[p.stem] = _dataset_from_doc(json.loads(p.read_text()))
        for p in (self.data_dir / "models").iterdir():
            sp = p / "session.json"
            if not sp.is_file():
                continue
            doc = json.loads(sp.read_text())
            dataset = self.datasets.get(doc["dataset_id"])
            if dataset is None:
                continue
            dataset = Dataset(dataset.features, dataset.target,
                              np.array(doc["weights"]), dataset.feature_names,
                              dataset.row_ids)
            s = ModelSession(doc["model_id"], doc["dataset_id"], dataset,
                             TrainConfig.from_dict(doc["config"]), self)
            s.constraints = [ConstraintSpec.from_dict(c) for c in doc["constraints"]]
            s.revision = doc["revision"]
            s.state = doc["state"]
            s.error = doc.get("error")
            mp = p / "model.json"
            if mp.is_file():
                s.model = load_model(mp.read_bytes())
            self.sessions[s.model_id] = s

    def add_dataset(self, d: Dataset) -> str:
        did = uuid.uuid4().hex[:12]
        self.datasets[did] = d
        (self.data_dir / "datasets" / f"{did}.json").write_text(
            json.dumps(_dataset_to_doc(d)))
        return did

    def get_dataset(self, did: str) -> Dataset:
        if did not in self.datasets:
            raise HTTPException(status_code=404, detail=f"unknown dataset {did}")
        return self.datasets[did]

    def get_session(self, mid: str) -> ModelSession:
        if mid not in self.sessions:
            raise HTTPException(status_code=404, detail=f"unknown model {mid}")
        return self.sessions[mid]


def create_app(data_dir, default_seed: int = 0) -> FastAPI:
    app = FastAPI(title="plgam service")
    store = Store(Path(data_dir), default_seed)
    app.state.store = store

    @app.post("/datasets", status_code=201)
    def upload_dataset(req: DatasetUpload):
        import tempfile

        with tempfile.NamedTemporaryFile("w", suffix=".csv", delete=False) as fh:
            fh.write(req.csv_text)
            tmp = fh.name
        try:
            d = load_csv(tmp, req.target_column, req.weight_column, req.id_column)
        except PlgamError as e:
            raise HTTPException(status_code=400, detail=str(e))
        finally:
            Path(tmp).unlink(missing_ok=True)
        return {"dataset_id": store.add_dataset(d), "rows": d.n_rows,
                "feature_names": list(d.feature_names)}

    @app.post("/models", status_code=202)
    def create_model(req: ModelRequest):
        dataset = store.get_dataset(req.dataset_id)
        try:
            cfg_doc = dict(req.config)
            cfg_doc.setdefault("seed", store.default_seed)
            cfg = TrainConfig.from_dict(cfg_doc)
        except (PlgamError, TypeError) as e:
            raise HTTPException(status_code=400, detail=str(e))
        mid = uuid.uuid4().hex[:12]
        session = ModelSession(mid, req.dataset_id, dataset, cfg, store)
        session.state = "idle"
        store.sessions[mid] = session
        session.persist()
        if not session.start_retrain():
            raise HTTPException(status_code=409, detail="retrain in progress")
        return {"model_id": mid}

    @app.get("/models/{mid}")
    def get_model(mid: str):
        s = store.get_session(mid)
        with s.lock:
            return {
                "model_id": mid,
                "dataset_id": s.dataset_id,
                "state": s.state,
                "error": s.error,
                "revision": s.revision,
                "config": s.config.to_dict(),
                "constraints": [c.to_dict() for c in s.constraints],
                "loss_trace": (s.model.training_meta.get("loss_trace", [])
                               if s.model else []),
                "feature_names": list(s.dataset.feature_names),
            }

    @app.get("/models/{mid}/series")
    def get_series(mid: str, ref_factor: Optional[str] = None,
                   from_row: int = Query(0, alias="from"),
                   to_row: Optional[int] = Query(None, alias="to")):
        s = store.get_session(mid)
        s.require_idle()
        n = s.dataset.n_rows
        to_row = n if to_row is None else to_row
        if not (0 <= from_row < to_row <= n):
            raise HTTPException(status_code=400, detail=f"bad range [{from_row}, {to_row})")
        ref = None
        if ref_factor is not None:
            if ref_factor not in s.dataset.feature_names:
                raise HTTPException(status_code=400, detail=f"unknown ref_factor {ref_factor!r}")
            ref = s.dataset.column(s.dataset.feature_names.index(ref_factor))[
                from_row:to_row].tolist()
        window = slice(from_row, to_row)
        pred = s.model.predict(s.dataset.features[window])
        ids = (list(s.dataset.row_ids[from_row:to_row]) if s.dataset.row_ids
               else list(map(str, range(from_row, to_row))))
        return {"revision": s.revision, "from_row": from_row, "to_row": to_row,
                "row_ids": ids, "actual": s.dataset.target[window].tolist(),
                "predicted": pred.tolist(), "ref_factor": ref_factor,
                "ref_values": ref, "n_rows": n}

    @app.post("/models/{mid}/weights")
    def edit_weights(mid: str, req: WeightEdit):
        s = store.get_session(mid)
        if s.state == "running":
            raise HTTPException(status_code=409, detail="retrain in progress")
        if req.op not in ("increase", "decrease"):
            raise HTTPException(status_code=400, detail=f"unknown op {req.op!r}")
        if req.rows is not None:
            rows = req.rows
        elif req.start is not None and req.end is not None:
            if not (0 <= req.start < req.end <= s.dataset.n_rows):
                raise HTTPException(status_code=400, detail="bad row range")
            rows = list(range(req.start, req.end))
        else:
            raise HTTPException(status_code=400, detail="need rows or start/end")
        factor = 2.0 if req.op == "increase" else 0.5
        try:
            from .dataset import multiply_weights
            with s.lock:
                s.dataset = multiply_weights(s.dataset, rows, factor)
                s.revision += 1
        except ValidationError as e:
            raise HTTPException(status_code=400, detail=str(e))
        s.persist()
        return {"revision": s.revision}

    @app.post("/models/{mid}/constraints", status_code=201)
    def add_constraint(mid: str, req: ConstraintRequest):
        s = store.get_session(mid)
        s.require_idle()
        feat = req.feature
        if isinstance(feat, str):
            if feat not in s.dataset.feature_names:
                raise HTTPException(status_code=400, detail=f"unknown feature {feat!r}")
            feat = s.dataset.feature_names.index(feat)
        if req.kind not in KINDS:
            raise HTTPException(status_code=400, detail=f"unknown kind {req.kind!r}")
        if len(req.range) != 2 or not req.range[0] < req.range[1]:
            raise HTTPException(status_code=400, detail="range must be [lo, hi] with lo < hi")
        spec = ConstraintSpec(int(feat), req.kind, float(req.range[0]), float(req.range[1]))
        covered = s.model.constraint_window(spec).size
        if covered < 2:
            raise HTTPException(
                status_code=400,
                detail=f"range covers only {covered} anchor(s) of the shape grid; "
                       f"need at least 2")
        with s.lock:
            s.constraints.append(spec)
            s.revision += 1
        s.persist()
        return {"constraint_id": spec.id, "revision": s.revision}

    @app.get("/models/{mid}/constraints")
    def list_constraints(mid: str):
        s = store.get_session(mid)
        return {"constraints": [c.to_dict() for c in s.constraints]}

    @app.delete("/models/{mid}/constraints/{cid}")
    def delete_constraint(mid: str, cid: str):
        s = store.get_session(mid)
        s.require_idle()
        with s.lock:
            keep = [c for c in s.constraints if c.id != cid]
            if len(keep) == len(s.constraints):
                raise HTTPException(status_code=404, detail=f"unknown constraint {cid}")
            s.constraints = keep
            s.revision += 1
        s.persist()
        return {"revision": s.revision}

    @app.post("/models/{mid}/retrain", status_code=202)
    def retrain(mid: str):
        s = store.get_session(mid)
        if not s.start_retrain():
            raise HTTPException(status_code=409, detail="retrain in progress")
        return {"model_id": mid, "state": "running"}

    @app.get("/models/{mid}/shapes/{feature}")
    def get_shape(mid: str, feature: str):
        s = store.get_session(mid)
        s.require_idle()
        if feature not in s.dataset.feature_names:
            raise HTTPException(status_code=404, detail=f"unknown feature {feature!r}")
        d = s.dataset.feature_names.index(feature)
        anchors, values, slopes = s.model.shape_values(d, in_raw_units=True)
        counts, mass = density_profile(s.dataset.column(d), anchors, s.dataset.weights)
        active = [c.to_dict() for c in s.constraints if c.feature == d]
        return {"revision": s.revision, "feature": feature,
                "anchors": anchors.tolist(), "values": values.tolist(),
                "edge_slopes": list(slopes),
                "density": {"counts": counts.tolist(), "mass": mass.tolist()},
                "constraints": active}

    @app.get("/models/{mid}/export")
    def export_model(mid: str):
        s = store.get_session(mid)
        s.require_idle()
        return Response(content=save_model(s.model), media_type="application/json")

    @app.post("/models/import", status_code=201)
    def import_model(req: ImportRequest):
        try:
            model = GamModel.from_document(req.model)
        except PlgamError as e:
            raise HTTPException(status_code=400, detail=str(e))
        if req.dataset_id is not None:
            dataset = store.get_dataset(req.dataset_id)
            if dataset.feature_names != model.feature_names:
                raise HTTPException(status_code=400,
                                    detail="dataset schema does not match model")
        else:
            raise HTTPException(status_code=400, detail="dataset_id required for import")
        mid = uuid.uuid4().hex[:12]
        session = ModelSession(mid, req.dataset_id, dataset, model.config, store)
        session.model = model
        session.constraints = list(model.constraints)
        session.state = "idle"
        session.revision = 1
        store.sessions[mid] = session
        session.persist()
        return {"model_id": mid}

    return app
