"""
Fonctions de création de graphiques réutilisables
"""

import logging
from pathlib import Path

import plotly.graph_objects as go

from models.train_log import TrainLog
from utils.exceptions import DataError
from utils.file_utils import PathLike

logger = logging.getLogger(__name__)


def create_loss_curve(log: TrainLog, title: str = "Perte d'entraînement") -> go.Figure:
    """
    Crée la courbe de perte (et le taux d'apprentissage sur un axe secondaire)

    Args:
        log: Journal d'entraînement
        title: Titre du graphique

    Returns:
        Figure plotly
    """
    frame = log.to_dataframe()
    fig = go.Figure()
    fig.add_trace(go.Scatter(
        x=frame["iteration"], y=frame["loss"],
        mode="lines", name="perte", line={"color": "darkblue"},
    ))
    fig.add_trace(go.Scatter(
        x=frame["iteration"], y=frame["lr"],
        mode="lines", name="taux d'apprentissage", yaxis="y2",
        line={"color": "orange", "dash": "dot"},
    ))
    fig.update_layout(
        title=title,
        xaxis={"title": "itération"},
        yaxis={"title": "perte", "type": "log" if (frame["loss"] > 0).all() else "linear"},
        yaxis2={"title": "lr", "overlaying": "y", "side": "right"},
        legend={"x": 0.7, "y": 0.95},
    )
    return fig


def save_loss_curve(log: TrainLog, path: PathLike) -> Path:
    """
    Écrit la courbe de perte en HTML autonome

    Raises:
        DataError: journal vide
    """
    if len(log) == 0:
        raise DataError("journal d'entraînement vide, aucune courbe à tracer")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    create_loss_curve(log).write_html(str(path), include_plotlyjs=True, full_html=True)
    logger.info("courbe de perte: %s", path)
    return path
