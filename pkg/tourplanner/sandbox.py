"""Sandbox world: cities, attractions, restaurants, hotels and transport legs."""
import itertools
import logging
import math
import re
from dataclasses import dataclass
from types import MappingProxyType

import numpy as np
import voluptuous as vol

from .common import (
    ParseError,
    PreconditionError,
    TourPlannerError,
    atomic_write,
    canonical_json,
    day_slot,
    format_clock,
    format_window,
    load_json,
    normalize_name,
    parse_clock,
    parse_window,
)
from .const import (
    CATEGORIES,
    CUISINES,
    DAY_SLOTS,
    GRADES,
    KIND_ATTRACTION,
    KIND_HOTEL,
    KIND_RESTAURANT,
    KIND_TRANSPORT,
    MODE_FLIGHT,
    MODE_TRAIN,
    MODES,
    SCHEMA_VERSION,
)

_LOGGER = logging.getLogger(__name__)

HOURS_PER_DAY = 10.0
DURATION_RANGE_RE = re.compile(
    r"^\s*([\d.]+)\s*(?:-|–|to)\s*([\d.]+)\s*(hours?|hrs?|h|days?)\s*$", re.I
)
DURATION_SINGLE_RE = re.compile(r"^\s*([\d.]+)\s*(hours?|hrs?|h|days?)\s*$", re.I)


def clock(value):
    """Validate a HH:MM value and return minutes of day."""
    try:
        return parse_clock(value)
    except ValueError as ex:
        raise vol.Invalid(str(ex)) from ex


def opening_window(value):
    """Validate an opening window and return (open, close) minutes."""
    try:
        start, end = parse_window(value)
    except ValueError as ex:
        raise vol.Invalid(str(ex)) from ex
    if not start < end:
        raise vol.Invalid(f"window {value!r} must open before it closes")
    return start, end


def duration_bounds(value):
    """Validate recommended duration and return (min_hours, max_hours).

    Text like "1-2 hours" or "0.5-1 day" is normalized, a day being 10 hours.
    """
    if isinstance(value, str):
        match = DURATION_RANGE_RE.match(value)
        if match:
            low, high, unit = float(match.group(1)), float(match.group(2)), match.group(3)
        else:
            match = DURATION_SINGLE_RE.match(value)
            if not match:
                raise vol.Invalid(f"unrecognized duration {value!r}")
            low = high = float(match.group(1))
            unit = match.group(2)
        if unit.lower().startswith("d"):
            low, high = low * HOURS_PER_DAY, high * HOURS_PER_DAY
    elif isinstance(value, (list, tuple)) and len(value) == 2:
        try:
            low, high = float(value[0]), float(value[1])
        except (TypeError, ValueError) as ex:
            raise vol.Invalid(f"duration bounds must be numbers: {value!r}") from ex
    else:
        raise vol.Invalid(f"unrecognized duration {value!r}")
    if not 0 < low <= high:
        raise vol.Invalid(f"duration bounds need 0 < min <= max, got {value!r}")
    return low, high


def _coord(low, high):
    return vol.All(vol.Coerce(float), vol.Range(min=low, max=high))


NONNEG = vol.All(vol.Coerce(float), vol.Range(min=0))
POSITIVE = vol.All(vol.Coerce(float), vol.Range(min=0, min_included=False))
RATING = vol.All(vol.Coerce(float), vol.Range(min=0, max=5))
SUB_RATING = vol.All(vol.Coerce(float), vol.Range(min=0, max=10))
IDENT = vol.All(vol.Coerce(str), vol.Length(min=1))
LABEL = vol.Any(None, int)

CITY_SCHEMA = vol.Schema(
    {
        vol.Required("name"): IDENT,
        vol.Optional("lat", default=None): vol.Any(None, _coord(-90, 90)),
        vol.Optional("lon", default=None): vol.Any(None, _coord(-180, 180)),
    }
)

PLACE = {
    vol.Required("id"): IDENT,
    vol.Required("name"): IDENT,
    vol.Required("city"): IDENT,
    vol.Required("lat"): _coord(-90, 90),
    vol.Required("lon"): _coord(-180, 180),
    vol.Optional("cluster_label", default=None): LABEL,
}

ATTRACTION_SCHEMA = vol.Schema(
    {
        **PLACE,
        vol.Optional("grade", default="none"): vol.In(GRADES),
        vol.Optional("popularity", default=0.0): NONNEG,
        vol.Optional("rating", default=0.0): RATING,
        vol.Optional("entrance_fee", default=0.0): NONNEG,
        vol.Required("opening"): opening_window,
        vol.Optional("last_admission", default=None): vol.Any(None, clock),
        vol.Required("duration"): duration_bounds,
        vol.Optional("feature_text", default=""): str,
        vol.Optional("food_district", default=False): bool,
    }
)

RESTAURANT_SCHEMA = vol.Schema(
    {
        **PLACE,
        vol.Required("cuisine"): vol.In(CUISINES),
        vol.Required("avg_price"): POSITIVE,
        vol.Optional("rating", default=0.0): RATING,
        vol.Optional("env_rating", default=0.0): SUB_RATING,
        vol.Optional("service_rating", default=0.0): SUB_RATING,
    }
)

HOTEL_SCHEMA = vol.Schema(
    {
        **PLACE,
        vol.Required("category"): vol.In(CATEGORIES),
        vol.Required("price_per_night"): POSITIVE,
        vol.Optional("rating", default=0.0): RATING,
    }
)

TRANSPORT_SCHEMA = vol.Schema(
    {
        vol.Required("id"): IDENT,
        vol.Required("mode"): vol.In(MODES),
        vol.Required("origin_city"): IDENT,
        vol.Required("dest_city"): IDENT,
        vol.Required("depart"): clock,
        vol.Required("arrive"): clock,
        vol.Required("price"): POSITIVE,
        vol.Optional("day_slot", default=None): vol.Any(None, vol.In(DAY_SLOTS)),
    }
)

SANDBOX_SCHEMA = vol.Schema(
    {
        vol.Required("schema_version"): int,
        vol.Required("cities"): [vol.Any(str, dict)],
        vol.Optional("attractions", default=list): [dict],
        vol.Optional("restaurants", default=list): [dict],
        vol.Optional("hotels", default=list): [dict],
        vol.Optional("transport", default=list): [dict],
    }
)


@dataclass(frozen=True)
class City:
    """A city, with an optional center point."""

    name: str
    lat: float = None
    lon: float = None

    def to_dict(self):
        """Return the canonical document form."""
        return {"name": self.name, "lat": self.lat, "lon": self.lon}


@dataclass(frozen=True)
class Attraction:
    """A point of interest that can be visited."""

    id: str
    name: str
    city: str
    lat: float
    lon: float
    grade: str
    popularity: float
    rating: float
    entrance_fee: float
    opening_window: tuple
    duration_bounds: tuple
    feature_text: str = ""
    food_district: bool = False
    last_admission: int = None
    cluster_label: int = None

    kind = KIND_ATTRACTION

    @property
    def grade_rank(self):
        """Return the grade as an index into GRADES."""
        return GRADES.index(self.grade)

    def to_dict(self):
        """Return the canonical document form."""
        return {
            "id": self.id,
            "name": self.name,
            "city": self.city,
            "lat": self.lat,
            "lon": self.lon,
            "grade": self.grade,
            "popularity": self.popularity,
            "rating": self.rating,
            "entrance_fee": self.entrance_fee,
            "opening": format_window(self.opening_window),
            "last_admission": (
                None if self.last_admission is None else format_clock(self.last_admission)
            ),
            "duration": list(self.duration_bounds),
            "feature_text": self.feature_text,
            "food_district": self.food_district,
            "cluster_label": self.cluster_label,
        }


@dataclass(frozen=True)
class Restaurant:
    """A place to eat."""

    id: str
    name: str
    city: str
    lat: float
    lon: float
    cuisine: str
    avg_price: float
    rating: float = 0.0
    env_rating: float = 0.0
    service_rating: float = 0.0
    cluster_label: int = None

    kind = KIND_RESTAURANT

    def to_dict(self):
        """Return the canonical document form."""
        return {
            "id": self.id,
            "name": self.name,
            "city": self.city,
            "lat": self.lat,
            "lon": self.lon,
            "cuisine": self.cuisine,
            "avg_price": self.avg_price,
            "rating": self.rating,
            "env_rating": self.env_rating,
            "service_rating": self.service_rating,
            "cluster_label": self.cluster_label,
        }


@dataclass(frozen=True)
class Hotel:
    """A place to stay."""

    id: str
    name: str
    city: str
    lat: float
    lon: float
    category: str
    price_per_night: float
    rating: float = 0.0
    cluster_label: int = None

    kind = KIND_HOTEL

    def to_dict(self):
        """Return the canonical document form."""
        return {
            "id": self.id,
            "name": self.name,
            "city": self.city,
            "lat": self.lat,
            "lon": self.lon,
            "category": self.category,
            "price_per_night": self.price_per_night,
            "rating": self.rating,
            "cluster_label": self.cluster_label,
        }


@dataclass(frozen=True)
class TransportLeg:
    """A scheduled flight or train between two cities."""

    id: str
    mode: str
    origin_city: str
    dest_city: str
    depart: int
    arrive: int
    price: float
    day_slot: str

    kind = KIND_TRANSPORT

    @property
    def name(self):
        """Legs are named by their code."""
        return self.id

    def to_dict(self):
        """Return the canonical document form."""
        return {
            "id": self.id,
            "mode": self.mode,
            "origin_city": self.origin_city,
            "dest_city": self.dest_city,
            "depart": format_clock(self.depart),
            "arrive": format_clock(self.arrive),
            "price": self.price,
            "day_slot": self.day_slot,
        }


class Sandbox:
    """Immutable catalog of the planning world with name indexes."""

    def __init__(self, cities, attractions, restaurants, hotels, transport):
        """Initialize and index a sandbox, checking cross-entity invariants."""
        self.cities = tuple(cities)
        self.attractions = tuple(attractions)
        self.restaurants = tuple(restaurants)
        self.hotels = tuple(hotels)
        self.transport = tuple(transport)
        self._city_names = {normalize_name(city.name): city for city in self.cities}
        if len(self._city_names) != len(self.cities):
            raise DuplicateId("duplicate city name")

        by_kind = {
            KIND_ATTRACTION: self.attractions,
            KIND_RESTAURANT: self.restaurants,
            KIND_HOTEL: self.hotels,
            KIND_TRANSPORT: self.transport,
        }
        ids = {}
        names = {}
        for kind, entities in by_kind.items():
            ids[kind] = {}
            names[kind] = {}
            for entity in entities:
                if entity.id in ids[kind]:
                    raise DuplicateId(f"duplicate {kind} id {entity.id!r}")
                ids[kind][entity.id] = entity
                if kind == KIND_TRANSPORT:
                    for city in (entity.origin_city, entity.dest_city):
                        self._check_city(kind, entity.id, city)
                    key = (None, normalize_name(entity.id))
                else:
                    self._check_city(kind, entity.id, entity.city)
                    key = (normalize_name(entity.city), normalize_name(entity.name))
                if key in names[kind]:
                    raise DuplicateId(
                        f"{kind} names {names[kind][key].name!r} and {entity.name!r} "
                        f"collide after normalization"
                    )
                names[kind][key] = entity
        self._ids = MappingProxyType(ids)
        self._names = MappingProxyType(names)

    def _check_city(self, kind, entity_id, city):
        if normalize_name(city) not in self._city_names:
            raise UnknownCity(f"{kind} {entity_id!r} references unknown city {city!r}")

    def has_city(self, city):
        """Return True if the city exists."""
        return normalize_name(city) in self._city_names

    def city(self, name):
        """Return the City for a name."""
        try:
            return self._city_names[normalize_name(name)]
        except KeyError:
            raise UnknownCity(f"unknown city {name!r}") from None

    def get(self, kind, entity_id):
        """Return an entity by id or None."""
        return self._ids[kind].get(entity_id)

    def resolve(self, city, name, kind):
        """Return the entity of kind named name in city, or None.

        Transport legs are resolved by code; a city, when given, must be the
        leg's origin or destination.
        """
        if kind not in self._names or name is None:
            return None
        if kind == KIND_TRANSPORT:
            leg = self._names[kind].get((None, normalize_name(name)))
            if leg is None or city is None:
                return leg
            wanted = normalize_name(city)
            if wanted in (normalize_name(leg.origin_city), normalize_name(leg.dest_city)):
                return leg
            return None
        return self._names[kind].get((normalize_name(city), normalize_name(name)))

    def in_city(self, kind, city):
        """Return the entities of kind located in city."""
        wanted = normalize_name(city)
        entities = {
            KIND_ATTRACTION: self.attractions,
            KIND_RESTAURANT: self.restaurants,
            KIND_HOTEL: self.hotels,
        }[kind]
        return [entity for entity in entities if normalize_name(entity.city) == wanted]

    def legs(self, origin_city, dest_city):
        """Return transport legs between two cities."""
        origin, dest = normalize_name(origin_city), normalize_name(dest_city)
        return [
            leg
            for leg in self.transport
            if normalize_name(leg.origin_city) == origin
            and normalize_name(leg.dest_city) == dest
        ]

    def counts(self):
        """Return entity counts (cities, attractions, restaurants, hotels, legs)."""
        return (
            len(self.cities),
            len(self.attractions),
            len(self.restaurants),
            len(self.hotels),
            len(self.transport),
        )

    def to_dict(self):
        """Return the canonical document form."""
        return {
            "schema_version": SCHEMA_VERSION,
            "cities": [city.to_dict() for city in self.cities],
            "attractions": [item.to_dict() for item in self.attractions],
            "restaurants": [item.to_dict() for item in self.restaurants],
            "hotels": [item.to_dict() for item in self.hotels],
            "transport": [item.to_dict() for item in self.transport],
        }

    def __repr__(self):
        """Return internal string representation of object."""
        return "Sandbox(cities=%d, attractions=%d, restaurants=%d, hotels=%d, legs=%d)" % (
            self.counts()
        )


def _validated(schema, record, kind):
    try:
        return schema(record)
    except vol.Invalid as ex:
        entity_id = record.get("id", record.get("name", "?")) if isinstance(record, dict) else "?"
        path = ".".join(str(part) for part in ex.path) or "record"
        raise ParseError(f"{kind} {entity_id!r}: field {path}: {ex.msg}") from ex


def _attraction(record):
    data = _validated(ATTRACTION_SCHEMA, record, KIND_ATTRACTION)
    admission = data["last_admission"]
    if admission is not None and not (
        data["opening"][0] <= admission <= data["opening"][1]
    ):
        raise ParseError(
            f"attraction {data['id']!r}: field last_admission: outside opening window"
        )
    return Attraction(
        id=data["id"],
        name=data["name"],
        city=data["city"],
        lat=data["lat"],
        lon=data["lon"],
        grade=data["grade"],
        popularity=data["popularity"],
        rating=data["rating"],
        entrance_fee=data["entrance_fee"],
        opening_window=data["opening"],
        duration_bounds=data["duration"],
        feature_text=data["feature_text"],
        food_district=data["food_district"],
        last_admission=admission,
        cluster_label=data["cluster_label"],
    )


def _transport(record):
    data = _validated(TRANSPORT_SCHEMA, record, KIND_TRANSPORT)
    slot = day_slot(data["depart"])
    if data["day_slot"] is not None and data["day_slot"] != slot:
        raise ParseError(
            f"transport {data['id']!r}: field day_slot: {data['day_slot']!r} does not "
            f"match departure {format_clock(data['depart'])}"
        )
    return TransportLeg(
        id=data["id"],
        mode=data["mode"],
        origin_city=data["origin_city"],
        dest_city=data["dest_city"],
        depart=data["depart"],
        arrive=data["arrive"],
        price=data["price"],
        day_slot=slot,
    )


def sandbox_from_dict(document):
    """Build a Sandbox from its document form; total or fail."""
    try:
        document = SANDBOX_SCHEMA(document)
    except vol.Invalid as ex:
        raise ParseError(f"sandbox: {ex}") from ex
    if document["schema_version"] != SCHEMA_VERSION:
        raise ParseError(f"unsupported schema version {document['schema_version']}")
    cities = []
    for record in document["cities"]:
        if isinstance(record, str):
            record = {"name": record}
        cities.append(City(**_validated(CITY_SCHEMA, record, "city")))
    return Sandbox(
        cities,
        [_attraction(record) for record in document["attractions"]],
        [
            Restaurant(**_validated(RESTAURANT_SCHEMA, record, KIND_RESTAURANT))
            for record in document["restaurants"]
        ],
        [Hotel(**_validated(HOTEL_SCHEMA, record, KIND_HOTEL)) for record in document["hotels"]],
        [_transport(record) for record in document["transport"]],
    )


def load_sandbox(path):
    """Load and validate a sandbox file."""
    sandbox = sandbox_from_dict(load_json(path))
    _LOGGER.debug("Loaded %r from %s", sandbox, path)
    return sandbox


def dump_sandbox(sandbox):
    """Return the canonical text of a sandbox."""
    return canonical_json(sandbox.to_dict())


def save_sandbox(sandbox, path):
    """Write a sandbox in canonical form."""
    atomic_write(path, dump_sandbox(sandbox))


CITY_CENTERS = [
    ("Xi'an", 34.3416, 108.9398),
    ("Wuhan", 30.5928, 114.3055),
    ("Nanjing", 32.0603, 118.7969),
    ("Shenzhen", 22.5431, 114.0579),
    ("Chengdu", 30.5728, 104.0668),
    ("Hangzhou", 30.2741, 120.1551),
    ("Beijing", 39.9042, 116.4074),
    ("Shanghai", 31.2304, 121.4737),
    ("Guangzhou", 23.1291, 113.2644),
    ("Chongqing", 29.5630, 106.5516),
    ("Suzhou", 31.2989, 120.5853),
    ("Kunming", 25.0389, 102.7183),
]

ADJECTIVES = [
    "Jade",
    "Golden",
    "Ancient",
    "Lotus",
    "Crane",
    "Willow",
    "Dragon",
    "Phoenix",
    "Silk Road",
    "Moonlit",
    "Pine",
    "Azure",
]

# noun, feature text, food district
ATTRACTION_THEMES = [
    ("Museum", "history museum with ancient relics and cultural exhibits", False),
    ("Temple", "ancient temple and buddhist heritage architecture", False),
    ("City Wall", "historic fortification and architectural landmark", False),
    ("Park", "scenic park with gardens, lakes and walking trails", False),
    ("Pagoda", "ancient pagoda and historical landmark", False),
    ("Food Street", "food street with local snacks and night market stalls", True),
    ("Gallery", "art gallery with modern culture exhibitions", False),
    ("Mountain", "mountain hiking with natural scenery", False),
    ("Palace", "imperial palace and historical site", False),
    ("Garden", "classical garden with traditional architecture", False),
    ("Old Town", "historic old town streets and local culture", False),
    ("Lake", "lakeside scenery and relaxing nature walks", False),
]

RESTAURANT_NOUNS = [
    "Kitchen",
    "Bistro",
    "Dining Hall",
    "Noodle House",
    "Canteen",
    "Tavern",
    "Eatery",
    "Grill",
    "Banquet Hall",
    "Courtyard Restaurant",
]

HOTEL_NOUNS = ["Hotel", "Inn", "Suites", "Lodge", "Residence", "Grand Hotel"]

HOTEL_PRICES = {
    "Economy": (120, 250),
    "Midscale": (250, 450),
    "Upscale": (450, 750),
    "Luxury": (800, 1500),
}

# departure ranges in minutes per slot
SLOT_DEPARTURES = {
    "early morning": (390, 510),
    "late morning": (540, 690),
    "afternoon": (720, 1050),
    "evening": (1080, 1140),
}

CARRIERS = ["CA", "CZ", "MU", "HU", "3U", "ZH"]
OPENING_TIMES = [480, 510, 540]
CLOSING_TIMES = [1020, 1050, 1080, 1260, 1320]
DURATION_CHOICES = [(1.0, 3.0), (2.0, 4.0), (1.0, 4.0), (2.0, 3.0), (3.0, 5.0)]
FEES = [0.0, 20.0, 40.0, 60.0, 120.0]

DEFAULT_SYNTHETIC_SPEC = {
    "cities": 2,
    "attractions": 20,
    "restaurants": 30,
    "hotels": 8,
    "transport": 8,
}

CENTER_RING_KM = 4.0
KM_PER_DEGREE = 111.195


def _offset(lat, lon, north_km, east_km):
    """Return a point displaced by the given kilometers."""
    return (
        round(lat + north_km / KM_PER_DEGREE, 6),
        round(lon + east_km / (KM_PER_DEGREE * math.cos(math.radians(lat))), 6),
    )


def _scatter(rng, center, radius_km):
    angle = rng.uniform(0.0, 2 * math.pi)
    distance = radius_km * math.sqrt(rng.uniform(0.0, 1.0))
    return _offset(center[0], center[1], distance * math.sin(angle), distance * math.cos(angle))


def _names(rng, nouns, count):
    """Return count (name, noun) pairs built from shuffled adjective-noun combos."""
    combos = list(itertools.product(ADJECTIVES, nouns))
    order = rng.permutation(len(combos))
    names = []
    for index in range(count):
        adj, noun = combos[order[index % len(combos)]]
        lap = index // len(combos)
        name = f"{adj} {noun}" if lap == 0 else f"{adj} {noun} {lap + 1}"
        names.append((name, noun))
    return names


def generate_synthetic(seed, spec=None, n_clusters_hint=4):
    """Return a deterministic synthetic sandbox.

    POI counts in spec are per city; "transport" is the number of legs per
    ordered city pair. Attractions are planted round-robin around
    n_clusters_hint centers on a ring around each city center.
    """
    spec = {**DEFAULT_SYNTHETIC_SPEC, **(spec or {})}
    if spec["cities"] < 1 or spec["cities"] > len(CITY_CENTERS):
        raise PreconditionError(
            f"cities must be between 1 and {len(CITY_CENTERS)}, got {spec['cities']}"
        )
    if n_clusters_hint < 1:
        raise PreconditionError("n_clusters_hint must be >= 1")
    for key in ("attractions", "restaurants", "hotels", "transport"):
        if spec[key] < 0:
            raise PreconditionError(f"{key} count must be >= 0")
    rng = np.random.default_rng(seed)
    cities, attractions, restaurants, hotels, legs = [], [], [], [], []
    for city_index, (city_name, lat, lon) in enumerate(CITY_CENTERS[: spec["cities"]]):
        cities.append(City(city_name, lat, lon))
        if n_clusters_hint == 1:
            centers = [(lat, lon)]
        else:
            phase = rng.uniform(0.0, 2 * math.pi)
            centers = [
                _offset(
                    lat,
                    lon,
                    CENTER_RING_KM * math.sin(phase + 2 * math.pi * i / n_clusters_hint),
                    CENTER_RING_KM * math.cos(phase + 2 * math.pi * i / n_clusters_hint),
                )
                for i in range(n_clusters_hint)
            ]
        prefix = f"c{city_index}"
        themes = {theme[0]: theme for theme in ATTRACTION_THEMES}
        for index, (name, noun) in enumerate(_names(rng, list(themes), spec["attractions"])):
            theme = themes[noun]
            point = _scatter(rng, centers[index % len(centers)], 0.25)
            opening = (int(rng.choice(OPENING_TIMES)), int(rng.choice(CLOSING_TIMES)))
            if theme[2]:
                opening = (600, 1320)
            admission = opening[1] - 90 if opening[1] <= 1050 else None
            grade = GRADES[int(rng.choice(4, p=[0.2, 0.2, 0.35, 0.25]))]
            attractions.append(
                Attraction(
                    id=f"{prefix}-a{index:03d}",
                    name=name,
                    city=city_name,
                    lat=point[0],
                    lon=point[1],
                    grade=grade,
                    popularity=round(float(rng.uniform(0, 100)), 1),
                    rating=round(float(rng.uniform(3.0, 5.0)), 1),
                    entrance_fee=float(rng.choice(FEES)),
                    opening_window=opening,
                    duration_bounds=DURATION_CHOICES[int(rng.integers(len(DURATION_CHOICES)))],
                    feature_text=f"{theme[1]} in {city_name}",
                    food_district=theme[2],
                    last_admission=admission,
                )
            )
        for index, (name, _) in enumerate(_names(rng, RESTAURANT_NOUNS, spec["restaurants"])):
            point = _scatter(rng, centers[index % len(centers)], 0.6)
            restaurants.append(
                Restaurant(
                    id=f"{prefix}-r{index:03d}",
                    name=name,
                    city=city_name,
                    lat=point[0],
                    lon=point[1],
                    cuisine=CUISINES[int(rng.integers(len(CUISINES)))],
                    avg_price=round(float(rng.uniform(40, 220)) * 2) / 2,
                    rating=round(float(rng.uniform(3.0, 5.0)), 1),
                    env_rating=round(float(rng.uniform(5.0, 10.0)), 1),
                    service_rating=round(float(rng.uniform(5.0, 10.0)), 1),
                )
            )
        for index, (name, _) in enumerate(_names(rng, HOTEL_NOUNS, spec["hotels"])):
            point = _scatter(rng, centers[index % len(centers)], 0.8)
            category = CATEGORIES[index % len(CATEGORIES)]
            low, high = HOTEL_PRICES[category]
            hotels.append(
                Hotel(
                    id=f"{prefix}-h{index:03d}",
                    name=name,
                    city=city_name,
                    lat=point[0],
                    lon=point[1],
                    category=category,
                    price_per_night=float(round(rng.uniform(low, high))),
                    rating=round(float(rng.uniform(3.5, 5.0)), 1),
                )
            )
    codes = set()
    for origin, dest in itertools.permutations([city.name for city in cities], 2):
        for index in range(spec["transport"]):
            slot = DAY_SLOTS[index % len(DAY_SLOTS)]
            mode = MODE_FLIGHT if index % 2 == 0 else MODE_TRAIN
            while True:
                if mode == MODE_FLIGHT:
                    carrier = CARRIERS[int(rng.integers(len(CARRIERS)))]
                    code = f"{carrier}{int(rng.integers(1000, 10000))}"
                else:
                    code = f"G{int(rng.integers(100, 10000))}"
                if code not in codes:
                    codes.add(code)
                    break
            low, high = SLOT_DEPARTURES[slot]
            depart = int(rng.integers(low // 5, high // 5 + 1)) * 5
            arrive = depart + int(rng.integers(16, 25)) * 5
            low_price, high_price = (300, 900) if mode == MODE_FLIGHT else (150, 500)
            legs.append(
                TransportLeg(
                    id=code,
                    mode=mode,
                    origin_city=origin,
                    dest_city=dest,
                    depart=depart,
                    arrive=arrive,
                    price=float(round(rng.uniform(low_price, high_price) / 10) * 10),
                    day_slot=day_slot(depart),
                )
            )
    sandbox = Sandbox(cities, attractions, restaurants, hotels, legs)
    _LOGGER.debug("Generated %r with seed %s", sandbox, seed)
    return sandbox


class DuplicateId(TourPlannerError):
    """Error to indicate duplicate ids or colliding names."""


class UnknownCity(TourPlannerError):
    """Error to indicate a reference to a city not in the sandbox."""
