"""Spatial math: haversine distances, DBSCAN clustering and anchoring."""
import logging
import math
from collections import namedtuple
from dataclasses import dataclass

import numpy as np
from sklearn.cluster import DBSCAN
from sklearn.metrics.pairwise import haversine_distances

from .common import PreconditionError, TourPlannerError
from .const import (
    DEFAULT_EPS0,
    DEFAULT_EPS_DECAY,
    DEFAULT_EPS_FLOOR,
    DEFAULT_MIN_SAMPLES,
    EARTH_RADIUS_KM,
)

_LOGGER = logging.getLogger(__name__)

GeoPoint = namedtuple("GeoPoint", "lat lon")
Anchor = namedtuple("Anchor", "label distance_km")


def geo_point(lat, lon):
    """Return a validated GeoPoint."""
    if not -90.0 <= lat <= 90.0 or not -180.0 <= lon <= 180.0:
        raise PreconditionError(f"invalid coordinates ({lat}, {lon})")
    return GeoPoint(float(lat), float(lon))


def point_of(entity):
    """Return the GeoPoint of anything with lat/lon."""
    return GeoPoint(entity.lat, entity.lon)


def _radians(points):
    return np.radians(np.asarray([[p[0], p[1]] for p in points], dtype=float))


def distance_matrix(points, others=None):
    """Return pairwise great-circle distances in km."""
    left = _radians(points)
    right = left if others is None else _radians(others)
    return haversine_distances(left, right) * EARTH_RADIUS_KM


def haversine(a, b):
    """Return the great-circle distance between two points in km."""
    return float(distance_matrix([a], [b])[0, 0])


@dataclass(frozen=True)
class ClusterConfig:
    """Parameters of adaptive DBSCAN."""

    min_clusters: int = 1
    min_samples: int = DEFAULT_MIN_SAMPLES
    eps0: float = DEFAULT_EPS0
    eps_decay: float = DEFAULT_EPS_DECAY
    eps_floor: float = DEFAULT_EPS_FLOOR

    def __post_init__(self):
        """Check parameter ranges."""
        if not 0 < self.eps_floor < self.eps0:
            raise PreconditionError("need 0 < eps_floor < eps0")
        if not 0 < self.eps_decay < 1:
            raise PreconditionError("need 0 < eps_decay < 1")
        if self.min_samples < 1:
            raise PreconditionError("min_samples must be >= 1")

    def max_iterations(self):
        """Return the bound on DBSCAN runs of adaptive_cluster."""
        return math.ceil(math.log(self.eps_floor / self.eps0) / math.log(self.eps_decay)) + 1


@dataclass(frozen=True)
class ClusterResult:
    """Labels (-1 is noise), per-cluster centroids and the epsilon used."""

    labels: tuple
    centroids: tuple
    final_eps: float
    iterations: int

    @property
    def cluster_count(self):
        """Return the number of clusters."""
        return len(self.centroids)

    def to_dict(self):
        """Return the JSON form."""
        return {
            "labels": list(self.labels),
            "centroids": [[c.lat, c.lon] for c in self.centroids],
            "final_eps_km": self.final_eps,
            "iterations": self.iterations,
        }


def dbscan(points, eps, min_samples):
    """Return DBSCAN labels under the haversine metric (eps in km).

    Clusters are numbered in the order their first core point appears.
    """
    if not eps > 0:
        raise PreconditionError("eps must be > 0")
    if min_samples < 1:
        raise PreconditionError("min_samples must be >= 1")
    if len(points) == 0:
        return []
    model = DBSCAN(eps=eps, min_samples=min_samples, metric="precomputed")
    labels = model.fit_predict(distance_matrix(points))
    return [int(label) for label in labels]


def _drop_small(labels, min_samples):
    """Relabel clusters with fewer than min_samples members as noise."""
    labels = np.asarray(labels, dtype=int)
    mapping = {}
    for label in labels:
        if label < 0 or label in mapping:
            continue
        if np.count_nonzero(labels == label) >= min_samples:
            mapping[label] = len(mapping)
    return [mapping.get(int(label), -1) for label in labels]


def centroids_of(points, labels):
    """Return the arithmetic mean point of each cluster, by label."""
    coords = np.asarray([[p[0], p[1]] for p in points], dtype=float)
    labels = np.asarray(labels, dtype=int)
    count = int(labels.max()) + 1 if labels.size else 0
    return tuple(
        GeoPoint(*map(float, coords[labels == label].mean(axis=0)))
        for label in range(count)
    )


def adaptive_cluster(points, cfg):
    """Cluster points, shrinking epsilon until enough clusters appear."""
    if len(points) < cfg.min_samples:
        raise InsufficientPoints(
            f"need at least {cfg.min_samples} points, got {len(points)}"
        )
    eps = cfg.eps0
    iterations = 1
    labels = _drop_small(dbscan(points, eps, cfg.min_samples), cfg.min_samples)
    while max(labels) + 1 < cfg.min_clusters and eps > cfg.eps_floor:
        eps = max(eps * cfg.eps_decay, cfg.eps_floor)
        iterations += 1
        labels = _drop_small(dbscan(points, eps, cfg.min_samples), cfg.min_samples)
        _LOGGER.debug("eps %.4f km gives %d clusters", eps, max(labels) + 1)
    result = ClusterResult(tuple(labels), centroids_of(points, labels), eps, iterations)
    _LOGGER.info(
        "Clustered %d points into %d clusters (eps %.3f km, %d runs)",
        len(points),
        result.cluster_count,
        eps,
        iterations,
    )
    return result


class AnchoredView:
    """Cluster labels and centroid distances for attractions and venues."""

    def __init__(self, clusters, attractions, hotels, restaurants):
        """Anchor venues to the nearest centroid of the attraction clusters."""
        if clusters.cluster_count == 0:
            raise NoClusters("every attraction is noise")
        if len(attractions) != len(clusters.labels):
            raise PreconditionError("clusters come from a different attraction set")
        self.clusters = clusters
        self.attractions = {}
        for attraction, label in zip(attractions, clusters.labels):
            distance = (
                haversine(point_of(attraction), clusters.centroids[label])
                if label >= 0
                else None
            )
            self.attractions[attraction.id] = Anchor(label, distance)
        self.hotels = self._nearest(hotels)
        self.restaurants = self._nearest(restaurants)

    def _nearest(self, venues):
        if not venues:
            return {}
        distances = distance_matrix([point_of(v) for v in venues], self.clusters.centroids)
        # argmin keeps the lowest cluster index on ties
        nearest = np.argmin(distances, axis=1)
        return {
            venue.id: Anchor(int(label), float(distances[row, label]))
            for row, (venue, label) in enumerate(zip(venues, nearest))
        }

    def label_of(self, entity):
        """Return the cluster label of an anchored entity, or None."""
        table = {
            "attraction": self.attractions,
            "hotel": self.hotels,
            "restaurant": self.restaurants,
        }.get(entity.kind, {})
        anchored = table.get(entity.id)
        return None if anchored is None else anchored.label

    def to_dict(self):
        """Return the JSON form."""
        return {
            "clusters": self.clusters.to_dict(),
            "attractions": {k: list(v) for k, v in self.attractions.items()},
            "hotels": {k: list(v) for k, v in self.hotels.items()},
            "restaurants": {k: list(v) for k, v in self.restaurants.items()},
        }


def anchor(clusters, attractions, hotels, restaurants):
    """Return the labeled view of attractions, hotels and restaurants."""
    return AnchoredView(clusters, attractions, hotels, restaurants)


class InsufficientPoints(TourPlannerError):
    """Error to indicate fewer points than min_samples."""


class NoClusters(TourPlannerError):
    """Error to indicate clustering produced only noise."""
