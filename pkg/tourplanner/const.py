"""Constants for the tourplanner package."""

DOMAIN = "tourplanner"
SCHEMA_VERSION = 1

# config sections
CONF_SANDBOX = "sandbox"
CONF_OUTPUT_DIR = "output_dir"
CONF_SEED = "seed"
CONF_PROVIDERS = "providers"
CONF_RECALL = "recall"
CONF_CLUSTER = "cluster"
CONF_CCOT = "ccot"
CONF_GATE = "gate"
CONF_GSPO = "gspo"
CONF_REWARD = "reward"
CONF_SCHEDULE = "schedule"
CONF_EVALUATION = "evaluation"

# providers
CONF_CHAT = "chat"
CONF_EMBED = "embed"
CONF_JUDGE = "judge"
CONF_MOCK = "mock"
CONF_ENDPOINT_URL = "endpoint_url"
CONF_API_KEY_ENV = "api_key_env"
CONF_MODEL = "model"
CONF_TIMEOUT = "timeout"
CONF_MAX_RETRIES = "max_retries"
CONF_PARALLELISM = "parallelism"

# recall
CONF_SEMANTIC_PER_DAY = "semantic_per_day"
CONF_TOTAL_PER_DAY = "total_per_day"
CONF_GRADE_FLOOR = "landmark_grade_floor"

# cluster
CONF_MIN_SAMPLES = "min_samples"
CONF_EPS0 = "eps0"
CONF_EPS_DECAY = "eps_decay"
CONF_EPS_FLOOR = "eps_floor"

# ccot
CONF_MIN_AGENTS = "min_agents"
CONF_MAX_AGENTS = "max_agents"
CONF_TOP_K = "top_k"
CONF_SMOOTHING = "smoothing"

# gate / gspo / reward
CONF_TAU = "tau"
CONF_K = "k"
CONF_EPS_LOW = "eps_low"
CONF_EPS_HIGH = "eps_high"
CONF_REFERENCE_KM = "reference_distance_km"

# schedule
CONF_MIN_TRANSFER = "min_transfer_minutes"
CONF_IMPLICIT_TRANSFER = "implicit_transfer_minutes"
CONF_MAX_IDLE = "max_idle_minutes"
CONF_DAY_END = "day_end"
CONF_FLIGHT_BUFFER = "flight_buffer_minutes"
CONF_TRAIN_BUFFER = "train_buffer_minutes"

# evaluation
CONF_MEAL_TOLERANCE = "meal_price_tolerance"
CONF_ROUTE_RATIO = "route_length_ratio"

DEFAULT_ENDPOINT_URL = "https://api.openai.com/v1"
DEFAULT_API_KEY_ENV = "OPENAI_API_KEY"
DEFAULT_CHAT_MODEL = "gpt-4o-mini"
DEFAULT_EMBED_MODEL = "text-embedding-3-small"
DEFAULT_TIMEOUT = 60.0
DEFAULT_MAX_RETRIES = 2
DEFAULT_PARALLELISM = 4

DEFAULT_SEMANTIC_PER_DAY = 3
DEFAULT_TOTAL_PER_DAY = 9
DEFAULT_MIN_SAMPLES = 4
DEFAULT_EPS0 = 1.0
DEFAULT_EPS_DECAY = 0.8
DEFAULT_EPS_FLOOR = 0.1
DEFAULT_MIN_AGENTS = 4
DEFAULT_MAX_AGENTS = 6
DEFAULT_TOP_K = 3
DEFAULT_SMOOTHING = 0.01
DEFAULT_TAU = 0.75
DEFAULT_K = 28.0
DEFAULT_EPS_LOW = 0.0003
DEFAULT_EPS_HIGH = 0.0004
DEFAULT_REFERENCE_KM = 3.0
DEFAULT_MEAL_TOLERANCE = 0.5
DEFAULT_ROUTE_RATIO = 1.5

EARTH_RADIUS_KM = 6371.0
MOCK_EMBEDDING_DIM = 32

HOTEL_SHARE = 0.55
MEAL_SHARE = 0.35
MEAL_LOW_FRACTION = 0.15
MEAL_HIGH_FRACTION = 0.45

# entity kinds
KIND_ATTRACTION = "attraction"
KIND_RESTAURANT = "restaurant"
KIND_HOTEL = "hotel"
KIND_TRANSPORT = "transport"
KINDS = [KIND_ATTRACTION, KIND_RESTAURANT, KIND_HOTEL, KIND_TRANSPORT]

GRADES = ["none", "3A", "4A", "5A"]

CATEGORY_ECONOMY = "Economy"
CATEGORY_MIDSCALE = "Midscale"
CATEGORY_UPSCALE = "Upscale"
CATEGORY_LUXURY = "Luxury"
# cheapest first
CATEGORIES = [
    CATEGORY_ECONOMY,
    CATEGORY_MIDSCALE,
    CATEGORY_UPSCALE,
    CATEGORY_LUXURY,
]

MODE_FLIGHT = "flight"
MODE_TRAIN = "train"
MODES = [MODE_FLIGHT, MODE_TRAIN]

SLOT_EARLY_MORNING = "early morning"
SLOT_LATE_MORNING = "late morning"
SLOT_AFTERNOON = "afternoon"
SLOT_EVENING = "evening"
DAY_SLOTS = [SLOT_EARLY_MORNING, SLOT_LATE_MORNING, SLOT_AFTERNOON, SLOT_EVENING]

WEEKDAYS = [
    "Monday",
    "Tuesday",
    "Wednesday",
    "Thursday",
    "Friday",
    "Saturday",
    "Sunday",
]

# closed vocabulary of restaurant types
CUISINES = [
    "Hot Pot",
    "Fast Food",
    "Northwestern Cuisine",
    "Snacks",
    "Buffet",
    "Seafood",
    "Pizza",
    "Barbecue",
    "Crayfish",
    "Hainan Cuisine",
    "Wontons and Dumplings",
    "Sichuan Cuisine",
    "Southeast Asian Cuisine",
    "Jiangsu and Zhejiang Cuisine",
    "Hunan Cuisine",
    "Yunnan and Guizhou Cuisine",
    "Porridge Shop",
    "Other Delicacies",
    "Rice Noodles",
    "Korean Cuisine",
    "Guangdong cuisine",
    "Japanese Cuisine",
    "Xinjiang Cuisine",
    "Western Cuisine",
    "Northeastern Cuisine",
    "Malatang",
    "Shandong Cuisine",
    "Farmhouse Cuisine",
    "Huaiyang Cuisine",
    "Creative Cuisine",
    "Vegetarian Cuisine",
    "Jiangxi Cuisine",
    "Chaoshan Cuisine",
    "Anhui Cuisine",
    "Taiwanese Cuisine",
    "Tea Restaurant",
    "Home-style Cooking",
    "Hubei Cuisine",
    "Beijing Cuisine",
    "Fujian Cuisine",
    "Guizhou Cuisine",
    "Private Kitchen",
    "Guangxi Cuisine",
    "Hakka Cuisine",
    "Tianjin Cuisine",
    "Shanxi Cuisine",
    "Henan Cuisine",
    "Shaanxi Cuisine",
]

STEP_TRANSPORTATION = "transportation"
STEP_CHECK_IN = "check-in"
STEP_CHECK_OUT = "check-out"
STEP_SIGHTSEEING = "sightseeing"
STEP_MEAL = "meal"
STEP_LOCAL_TRANSFER = "local_transfer"
STEP_TYPES = [
    STEP_TRANSPORTATION,
    STEP_CHECK_IN,
    STEP_CHECK_OUT,
    STEP_SIGHTSEEING,
    STEP_MEAL,
    STEP_LOCAL_TRANSFER,
]

ROLE_FIRST = "first"
ROLE_MIDDLE = "middle"
ROLE_LAST = "last"
ROLE_SINGLE = "single"
DAY_ROLES = [ROLE_FIRST, ROLE_MIDDLE, ROLE_LAST, ROLE_SINGLE]

PROVENANCE_SEMANTIC = "semantic"
PROVENANCE_LANDMARK = "landmark"
PROVENANCE_SUGGESTED = "suggested"
PROVENANCES = [PROVENANCE_SEMANTIC, PROVENANCE_LANDMARK, PROVENANCE_SUGGESTED]

BASE_AGENT_ID = "base"
COMMITTEE_AGENT_ID = "committee"

# minutes of day
LUNCH_WINDOW = (11 * 60, 14 * 60)
DINNER_WINDOW = (17 * 60, 20 * 60)
MIN_MEAL_SPACING = 5 * 60
DAY_END = 22 * 60 + 30
MIN_TRANSFER = 30
IMPLICIT_TRANSFER = 15
MAX_IDLE = 60
FLIGHT_BUFFER = 120
TRAIN_BUFFER = 60
# slot boundaries by departure time
SLOT_BOUNDS = [
    (SLOT_EARLY_MORNING, 0, 9 * 60),
    (SLOT_LATE_MORNING, 9 * 60, 12 * 60),
    (SLOT_AFTERNOON, 12 * 60, 18 * 60),
    (SLOT_EVENING, 18 * 60, 24 * 60),
]
MORNING_WINDOW = (8 * 60, 12 * 60)
AFTERNOON_WINDOW = (12 * 60, 18 * 60)
