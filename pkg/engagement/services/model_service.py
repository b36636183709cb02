"""
Model Service - Multi-Output Modeling Layer

Fits one boosted ensemble per target column ([log_cr, log_lr]) on the same design
matrix, bundles both with the fitted pipeline state into an EngagementModel, and
persists it as a version-gated JSON document.
"""

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np
from joblib import Parallel, delayed
from numpy.typing import ArrayLike, NDArray
from pydantic import ValidationError

from engagement.config.settings import settings
from engagement.exceptions import (
    DimensionMismatchException,
    EngagementException,
    LengthMismatchException,
    ModelFormatException,
    ModelIOException,
    ModelSchemaException,
)
from engagement.gbt import booster
from engagement.gbt.binning import BinMapper
from engagement.gbt.booster import GbtModel
from engagement.gbt.tree import LEAF, Tree
from engagement.schemas.model_file import (
    FORMAT_VERSION,
    GbtModelDocument,
    LeafNodeDocument,
    ModelDocument,
    NodeDocument,
    PipelineDocument,
    SplitNodeDocument,
)
from engagement.schemas.params import GbtParams
from engagement.schemas.pipeline import TARGET_NAMES, PipelineState
from engagement.utils.io import atomic_write_json

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class EngagementModel:
    """
    Two independently fitted ensembles plus everything needed to rebuild features.

    ``model_cr`` predicts log1p(comments/views); ``model_lr`` predicts log1p(likes/views).
    """

    model_cr: GbtModel
    model_lr: GbtModel
    pipeline: PipelineState
    feature_order: tuple[str, ...]
    params_used: dict[str, GbtParams] = field(default_factory=dict)
    format_version: int = FORMAT_VERSION

    @property
    def uses_log_clr(self) -> bool:
        return "log_clr" in self.feature_order


def _fit_target(
    target: str, X: NDArray[np.float64], y: NDArray[np.float64], params: GbtParams
) -> GbtModel:
    try:
        model = booster.fit(X, y, params)
    except EngagementException as exc:
        exc.message = f"{target}: {exc.message}"
        exc.detail = {**exc.detail, "target": target}
        exc.args = (exc.message,)
        raise
    logger.info(
        "Fitted target model",
        extra={
            "target": target,
            "n_trees": model.n_iter,
            "stopped_early_at": model.stopped_early_at,
        },
    )
    return model


# Persistence helpers


def _tree_to_document(tree: Tree) -> list[NodeDocument]:
    nodes: list[NodeDocument] = []
    for i in range(tree.n_nodes):
        if tree.feature[i] == LEAF:
            nodes.append(LeafNodeDocument(leaf=float(tree.value[i])))
        else:
            nodes.append(
                SplitNodeDocument(
                    feature=int(tree.feature[i]),
                    bin=int(tree.bin[i]),
                    threshold=float(tree.threshold[i]),
                    left=int(tree.left[i]),
                    right=int(tree.right[i]),
                )
            )
    return nodes


def _gbt_to_document(model: GbtModel) -> GbtModelDocument:
    return GbtModelDocument(
        baseline=model.baseline,
        learning_rate=model.learning_rate,
        bin_mapper=[thresholds.tolist() for thresholds in model.bin_mapper.thresholds],
        trees=[_tree_to_document(tree) for tree in model.trees],
        train_loss_curve=list(model.train_loss_curve),
        validation_loss_curve=list(model.validation_loss_curve),
        stopped_early_at=model.stopped_early_at,
    )


def _check_bin_mapper(name: str, bin_mapper: list[list[float]], n_features: int) -> BinMapper:
    if len(bin_mapper) != n_features:
        raise ModelSchemaException(
            f"{name}.bin_mapper has {len(bin_mapper)} features, expected {n_features}"
        )
    thresholds: list[NDArray[np.float64]] = []
    for j, values in enumerate(bin_mapper):
        array = np.array(values, dtype=np.float64)
        if array.size > 254:
            raise ModelSchemaException(f"{name}.bin_mapper[{j}] has more than 254 thresholds")
        if array.size > 1 and not np.all(np.diff(array) > 0):
            raise ModelSchemaException(f"{name}.bin_mapper[{j}] is not strictly ascending")
        thresholds.append(array)
    return BinMapper(thresholds=tuple(thresholds))


def _document_to_tree(name: str, nodes: list[NodeDocument], mapper: BinMapper) -> Tree:
    n_nodes = len(nodes)
    if n_nodes == 0:
        raise ModelSchemaException(f"{name}: empty tree")

    feature = np.full(n_nodes, LEAF, dtype=np.int32)
    bin_index = np.zeros(n_nodes, dtype=np.int32)
    threshold = np.full(n_nodes, np.nan, dtype=np.float64)
    left = np.full(n_nodes, LEAF, dtype=np.int32)
    right = np.full(n_nodes, LEAF, dtype=np.int32)
    value = np.zeros(n_nodes, dtype=np.float64)
    parents = np.zeros(n_nodes, dtype=np.intp)

    for i, node in enumerate(nodes):
        if isinstance(node, LeafNodeDocument):
            value[i] = node.leaf
            continue
        if node.feature >= mapper.n_features:
            raise ModelSchemaException(f"{name} node {i}: feature {node.feature} out of range")
        thresholds = mapper.thresholds[node.feature]
        if node.bin >= thresholds.size:
            raise ModelSchemaException(f"{name} node {i}: bin {node.bin} out of range")
        if node.threshold != thresholds[node.bin]:
            raise ModelSchemaException(f"{name} node {i}: threshold disagrees with bin_mapper")
        # children always follow their parent, which rules out cycles
        for child in (node.left, node.right):
            if not i < child < n_nodes:
                raise ModelSchemaException(f"{name} node {i}: child {child} out of range")
            parents[child] += 1
        feature[i] = node.feature
        bin_index[i] = node.bin
        threshold[i] = node.threshold
        left[i] = node.left
        right[i] = node.right

    if parents[0] != 0 or np.any(parents[1:] != 1):
        raise ModelSchemaException(f"{name}: nodes do not form a single tree")

    return Tree(
        feature=feature,
        bin=bin_index,
        threshold=threshold,
        left=left,
        right=right,
        value=value,
    )


def _document_to_gbt(name: str, document: GbtModelDocument, n_features: int) -> GbtModel:
    mapper = _check_bin_mapper(name, document.bin_mapper, n_features)
    trees = tuple(
        _document_to_tree(f"{name}.trees[{t}]", nodes, mapper)
        for t, nodes in enumerate(document.trees)
    )
    return GbtModel(
        baseline=document.baseline,
        trees=trees,
        learning_rate=document.learning_rate,
        bin_mapper=mapper,
        train_loss_curve=tuple(document.train_loss_curve),
        validation_loss_curve=tuple(document.validation_loss_curve),
        stopped_early_at=document.stopped_early_at,
    )


def _reject_constant(token: str) -> float:
    raise ValueError(f"non-finite number {token} in model file")


class ModelService:
    """
    Service class for multi-output fitting, prediction and persistence.

    EngagementModel instances are immutable once built.
    """

    @staticmethod
    def fit_multi(
        X: ArrayLike,
        Y: ArrayLike,
        params: GbtParams,
        pipeline: PipelineState,
        feature_order: tuple[str, ...] | None = None,
    ) -> EngagementModel:
        """
        Fit one model per target column with shared hyperparameters.

        The two fits are independent and run on worker threads when
        ``settings.N_JOBS > 1``; results do not depend on the thread count.

        Args:
            X: n x d design matrix
            Y: n x 2 targets [log_cr, log_lr]
            params: Hyperparameters used for both targets
            pipeline: Fitted pipeline state that produced X
            feature_order: Column names of X (defaults to the pipeline's)

        Returns:
            EngagementModel: Bundled model

        Raises:
            DimensionMismatchException: If Y does not have two columns or X does not
                match the feature order
            LengthMismatchException: If X and Y differ in row count
            ModelException: Fit errors, with the failing target in the message

        Example:
            model = ModelService.fit_multi(design.X, design.Y, GbtParams(seed=42), state)
        """
        features = np.asarray(X, dtype=np.float64)
        targets = np.asarray(Y, dtype=np.float64)
        order = tuple(feature_order or pipeline.feature_order)
        if targets.ndim != 2 or targets.shape[1] != len(TARGET_NAMES):
            raise DimensionMismatchException((None, 2), targets.shape, "Y")
        if features.ndim != 2 or features.shape[1] != len(order):
            raise DimensionMismatchException(len(order), features.shape, "X columns")
        if features.shape[0] != targets.shape[0]:
            raise LengthMismatchException(features.shape[0], targets.shape[0])

        model_cr, model_lr = Parallel(n_jobs=settings.N_JOBS, prefer="threads")(
            delayed(_fit_target)(name, features, targets[:, k], params)
            for k, name in enumerate(TARGET_NAMES)
        )
        return EngagementModel(
            model_cr=model_cr,
            model_lr=model_lr,
            pipeline=pipeline,
            feature_order=order,
            params_used={name: params for name in TARGET_NAMES},
        )

    @staticmethod
    def predict_multi(model: EngagementModel, X: ArrayLike) -> NDArray[np.float64]:
        """
        Predict [log_cr, log_lr] for each row.

        Raises:
            DimensionMismatchException: If X does not have the model's column count
        """
        features = np.asarray(X, dtype=np.float64)
        if features.ndim != 2 or features.shape[1] != len(model.feature_order):
            raise DimensionMismatchException(len(model.feature_order), features.shape, "X columns")
        return np.column_stack(
            [booster.predict(model.model_cr, features), booster.predict(model.model_lr, features)]
        )

    @staticmethod
    def to_document(model: EngagementModel) -> ModelDocument:
        """Persistable form of a model."""
        return ModelDocument(
            format_version=FORMAT_VERSION,
            feature_order=list(model.feature_order),
            pipeline=PipelineDocument(
                reference_date=model.pipeline.resolved_reference_date,
                clip_thresholds=dict(model.pipeline.clip_thresholds),
                config=model.pipeline.config,
            ),
            params_used=dict(model.params_used),
            model_cr=_gbt_to_document(model.model_cr),
            model_lr=_gbt_to_document(model.model_lr),
        )

    @staticmethod
    def from_document(document: ModelDocument) -> EngagementModel:
        """
        Rebuild a model from a validated document.

        Raises:
            ModelSchemaException: If the document is structurally inconsistent
        """
        feature_order = tuple(document.feature_order)
        expected_order = document.pipeline.config.feature_order
        if feature_order != expected_order:
            raise ModelSchemaException("feature_order does not match the pipeline config")
        if set(document.params_used) != set(TARGET_NAMES):
            raise ModelSchemaException(f"params_used must have keys {list(TARGET_NAMES)}")
        try:
            pipeline = PipelineState(
                resolved_reference_date=document.pipeline.reference_date,
                clip_thresholds=document.pipeline.clip_thresholds,
                config=document.pipeline.config,
            )
        except ValidationError as exc:
            raise ModelSchemaException(f"pipeline: {exc.errors()[0]['msg']}") from exc

        n_features = len(feature_order)
        return EngagementModel(
            model_cr=_document_to_gbt("model_cr", document.model_cr, n_features),
            model_lr=_document_to_gbt("model_lr", document.model_lr, n_features),
            pipeline=pipeline,
            feature_order=feature_order,
            params_used=dict(document.params_used),
            format_version=document.format_version,
        )

    @staticmethod
    def save(model: EngagementModel, path: Path | str) -> None:
        """
        Write the model as JSON (temp file + atomic rename).

        Raises:
            ModelIOException: If the file cannot be written
        """
        document = ModelService.to_document(model).model_dump(mode="json")
        try:
            atomic_write_json(Path(path), document)
        except OSError as exc:
            raise ModelIOException(str(path), exc.strerror or str(exc)) from exc
        logger.info("Saved model", extra={"path": str(path)})

    @staticmethod
    def load(path: Path | str) -> EngagementModel:
        """
        Read a model file.

        Returns:
            EngagementModel: Model whose predictions equal the saved model's bit for bit

        Raises:
            ModelIOException: If the file cannot be read
            ModelFormatException: If format_version is not supported
            ModelSchemaException: If the file is not a valid model document
        """
        try:
            text = Path(path).read_text(encoding="utf-8")
        except UnicodeDecodeError as exc:
            raise ModelSchemaException("file is not UTF-8 text") from exc
        except OSError as exc:
            raise ModelIOException(str(path), exc.strerror or str(exc)) from exc

        try:
            raw: Any = json.loads(text, parse_constant=_reject_constant)
        except ValueError as exc:
            raise ModelSchemaException(f"not valid JSON ({exc})") from exc
        if not isinstance(raw, dict):
            raise ModelSchemaException("top-level value must be an object")
        if "format_version" not in raw:
            raise ModelSchemaException("missing format_version")
        version = raw["format_version"]
        if type(version) is not int or version != FORMAT_VERSION:
            raise ModelFormatException(version)

        try:
            document = ModelDocument.model_validate(raw)
        except ValidationError as exc:
            first = exc.errors()[0]
            location = ".".join(str(part) for part in first["loc"])
            raise ModelSchemaException(f"{location}: {first['msg']}") from exc

        model = ModelService.from_document(document)
        logger.info("Loaded model", extra={"path": str(path)})
        return model
