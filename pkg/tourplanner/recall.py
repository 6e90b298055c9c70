"""Multi-channel attraction recall: semantic, landmark and suggested."""
import asyncio
import logging
from collections import namedtuple
from dataclasses import dataclass

from .common import PreconditionError, TourPlannerError, normalize_name, unit_rows
from .const import (
    DEFAULT_SEMANTIC_PER_DAY,
    DEFAULT_TOTAL_PER_DAY,
    GRADES,
    KIND_ATTRACTION,
    PROVENANCE_LANDMARK,
    PROVENANCES,
    PROVENANCE_SEMANTIC,
    PROVENANCE_SUGGESTED,
)
from .prompts import TEMPLATE_SUGGEST_ATTRACTIONS, request_for
from .providers import SchemaError, extract_document

_LOGGER = logging.getLogger(__name__)

Recalled = namedtuple("Recalled", "attraction score")
Candidate = namedtuple("Candidate", "attraction provenance score")

LANDMARK_FLOOR = "4A"


@dataclass(frozen=True)
class RecallConfig:
    """Channel sizes for one trip."""

    semantic_count: int
    total_count: int
    landmark_grade_floor: str = LANDMARK_FLOOR

    def __post_init__(self):
        """Check the counts."""
        if not 0 < self.semantic_count <= self.total_count:
            raise PreconditionError("need 0 < semantic_count <= total_count")
        if self.landmark_grade_floor not in GRADES:
            raise PreconditionError(f"unknown grade {self.landmark_grade_floor!r}")

    @classmethod
    def for_duration(
        cls,
        duration,
        semantic_per_day=DEFAULT_SEMANTIC_PER_DAY,
        total_per_day=DEFAULT_TOTAL_PER_DAY,
        landmark_grade_floor=LANDMARK_FLOOR,
    ):
        """Return the config scaled to a trip duration."""
        return cls(semantic_per_day * duration, total_per_day * duration, landmark_grade_floor)


class CandidateSet:
    """Recalled attractions in fill order, each tagged with its channel."""

    def __init__(self, candidates, channel_sizes=None):
        """Initialize a new CandidateSet."""
        self.candidates = tuple(candidates)
        self.channel_sizes = dict(channel_sizes or {})
        ids = [candidate.attraction.id for candidate in self.candidates]
        if len(ids) != len(set(ids)):
            raise PreconditionError("candidate set holds duplicate attractions")

    @property
    def attractions(self):
        """Return the attractions in order."""
        return [candidate.attraction for candidate in self.candidates]

    def ids(self):
        """Return the set of attraction ids."""
        return {candidate.attraction.id for candidate in self.candidates}

    def provenance_counts(self):
        """Return how many candidates each channel contributed."""
        counts = dict.fromkeys(PROVENANCES, 0)
        for candidate in self.candidates:
            counts[candidate.provenance] += 1
        return counts

    def __len__(self):
        """Return the number of candidates."""
        return len(self.candidates)

    def to_dict(self):
        """Return the JSON form."""
        return {
            "candidates": [
                {
                    "id": candidate.attraction.id,
                    "name": candidate.attraction.name,
                    "provenance": candidate.provenance,
                    "score": candidate.score,
                }
                for candidate in self.candidates
            ],
            "channel_sizes": self.channel_sizes,
            "provenance_counts": self.provenance_counts(),
        }


async def semantic_recall(profile, attractions, embedder, n):
    """Return the n attractions closest to the profile's requirements.

    Each requirement phrase is embedded next to the joined requirement text and
    an attraction keeps its best cosine similarity over them.
    """
    if n < 1:
        raise PreconditionError("n must be >= 1")
    if not attractions:
        raise PreconditionError("no attractions to recall from")
    queries = profile.requirement_texts()
    documents = [attraction.feature_text or attraction.name for attraction in attractions]
    vectors = unit_rows(await embedder.embed(queries + documents))
    similarity = vectors[len(queries) :] @ vectors[: len(queries)].T
    best = similarity.max(axis=1)
    ranked = sorted(
        zip(attractions, best),
        key=lambda item: (-item[1], -item[0].popularity, item[0].id),
    )
    return [Recalled(attraction, float(score)) for attraction, score in ranked[:n]]


def landmark_recall(attractions, cfg, n):
    """Return the n most popular attractions graded at or above the floor."""
    floor = GRADES.index(cfg.landmark_grade_floor)
    landmarks = sorted(
        (attraction for attraction in attractions if attraction.grade_rank >= floor),
        key=lambda attraction: (-attraction.popularity, -attraction.rating, attraction.id),
    )
    return [Recalled(attraction, attraction.popularity) for attraction in landmarks[:n]]


def _suggested_names(text):
    if not str(text or "").strip():
        return []
    document = extract_document(text)
    if isinstance(document, dict):
        document = document.get("attractions", [])
    if not isinstance(document, list):
        raise SchemaError("suggestions must be a JSON array")
    return [str(name) for name in document if isinstance(name, (str, int))]


async def llm_recall(profile, attractions, provider, limit=None):
    """Return the attractions the provider suggests that exist in the catalog."""
    city = profile.explicit.dest_city
    limit = limit or len(attractions)
    requirements = ", ".join(profile.explicit.other_requirements) or "sightseeing"
    request = request_for(
        TEMPLATE_SUGGEST_ATTRACTIONS,
        {"city": city, "requirements": list(profile.explicit.other_requirements), "limit": limit},
        city=city,
        limit=limit,
        requirements=requirements,
    )
    try:
        names = await provider.chat_structured(request, _suggested_names)
    except SchemaError as ex:
        _LOGGER.warning("Ignoring unusable attraction suggestions: %s", ex)
        return []
    index = {normalize_name(attraction.name): attraction for attraction in attractions}
    found, seen = [], set()
    for rank, name in enumerate(names):
        attraction = index.get(normalize_name(name))
        if attraction is None:
            _LOGGER.debug("Suggested attraction %r not in %s", name, city)
            continue
        if attraction.id in seen:
            continue
        seen.add(attraction.id)
        found.append(Recalled(attraction, float(-rank)))
    return found


def merge_recall(semantic, landmark, suggested, cfg):
    """Merge channel lists into one CandidateSet.

    Duplicates stay only in the highest priority channel (semantic, landmark,
    suggested); the set is then filled round-robin by rank.
    """
    channels = []
    seen = set()
    for provenance, items in (
        (PROVENANCE_SEMANTIC, semantic),
        (PROVENANCE_LANDMARK, landmark),
        (PROVENANCE_SUGGESTED, suggested),
    ):
        kept = []
        for item in items:
            if item.attraction.id in seen:
                continue
            seen.add(item.attraction.id)
            kept.append(Candidate(item.attraction, provenance, item.score))
        channels.append(kept)
    merged = []
    depth = max((len(channel) for channel in channels), default=0)
    for rank in range(depth):
        for channel in channels:
            if rank < len(channel) and len(merged) < cfg.total_count:
                merged.append(channel[rank])
    sizes = {
        provenance: len(items)
        for provenance, items in zip(
            (PROVENANCE_SEMANTIC, PROVENANCE_LANDMARK, PROVENANCE_SUGGESTED),
            (semantic, landmark, suggested),
        )
    }
    return CandidateSet(merged, sizes)


def recall_rate(candidates, ground_truth_ids):
    """Return the fraction of ground-truth attractions among the candidates."""
    truth = set(ground_truth_ids)
    if not truth:
        raise EmptyTruth("ground truth is empty")
    found = candidates.ids() if isinstance(candidates, CandidateSet) else set(candidates)
    return len(found & truth) / len(truth)


async def recall_candidates(profile, sandbox, chat, embedder, cfg):
    """Run the three channels concurrently and merge them."""
    attractions = sandbox.in_city(KIND_ATTRACTION, profile.explicit.dest_city)
    if not attractions:
        raise PreconditionError(f"{profile.explicit.dest_city} has no attractions")
    semantic, suggested = await asyncio.gather(
        semantic_recall(profile, attractions, embedder, cfg.semantic_count),
        llm_recall(profile, attractions, chat, cfg.total_count),
    )
    landmark = landmark_recall(attractions, cfg, cfg.total_count)
    candidates = merge_recall(semantic, landmark, suggested, cfg)
    _LOGGER.info(
        "Recalled %d of %d attractions (semantic %d, landmark %d, suggested %d)",
        len(candidates),
        len(attractions),
        len(semantic),
        len(landmark),
        len(suggested),
    )
    return candidates


class EmptyTruth(TourPlannerError):
    """Error to indicate an empty ground-truth set."""
