"""Run configuration: schema with defaults, overrides, hashing and providers."""
import json
import logging

import voluptuous as vol

from .common import (
    TourPlannerError,
    canonical_bytes,
    format_clock,
    load_json,
    parse_clock,
    sha256_hex,
)
from .const import (
    CONF_API_KEY_ENV,
    CONF_CCOT,
    CONF_CHAT,
    CONF_CLUSTER,
    CONF_DAY_END,
    CONF_EMBED,
    CONF_ENDPOINT_URL,
    CONF_EPS0,
    CONF_EPS_DECAY,
    CONF_EPS_FLOOR,
    CONF_EPS_HIGH,
    CONF_EPS_LOW,
    CONF_EVALUATION,
    CONF_FLIGHT_BUFFER,
    CONF_GATE,
    CONF_GRADE_FLOOR,
    CONF_GSPO,
    CONF_IMPLICIT_TRANSFER,
    CONF_JUDGE,
    CONF_K,
    CONF_MAX_AGENTS,
    CONF_MAX_IDLE,
    CONF_MAX_RETRIES,
    CONF_MEAL_TOLERANCE,
    CONF_MIN_AGENTS,
    CONF_MIN_SAMPLES,
    CONF_MIN_TRANSFER,
    CONF_MOCK,
    CONF_MODEL,
    CONF_OUTPUT_DIR,
    CONF_PARALLELISM,
    CONF_PROVIDERS,
    CONF_RECALL,
    CONF_REFERENCE_KM,
    CONF_REWARD,
    CONF_ROUTE_RATIO,
    CONF_SANDBOX,
    CONF_SCHEDULE,
    CONF_SEED,
    CONF_SEMANTIC_PER_DAY,
    CONF_SMOOTHING,
    CONF_TAU,
    CONF_TIMEOUT,
    CONF_TOP_K,
    CONF_TOTAL_PER_DAY,
    CONF_TRAIN_BUFFER,
    DAY_END,
    DEFAULT_API_KEY_ENV,
    DEFAULT_CHAT_MODEL,
    DEFAULT_EMBED_MODEL,
    DEFAULT_ENDPOINT_URL,
    DEFAULT_EPS0,
    DEFAULT_EPS_DECAY,
    DEFAULT_EPS_FLOOR,
    DEFAULT_EPS_HIGH,
    DEFAULT_EPS_LOW,
    DEFAULT_K,
    DEFAULT_MAX_AGENTS,
    DEFAULT_MAX_RETRIES,
    DEFAULT_MEAL_TOLERANCE,
    DEFAULT_MIN_AGENTS,
    DEFAULT_MIN_SAMPLES,
    DEFAULT_PARALLELISM,
    DEFAULT_REFERENCE_KM,
    DEFAULT_ROUTE_RATIO,
    DEFAULT_SEMANTIC_PER_DAY,
    DEFAULT_SMOOTHING,
    DEFAULT_TAU,
    DEFAULT_TIMEOUT,
    DEFAULT_TOP_K,
    DEFAULT_TOTAL_PER_DAY,
    FLIGHT_BUFFER,
    GRADES,
    IMPLICIT_TRANSFER,
    MAX_IDLE,
    MIN_TRANSFER,
    TRAIN_BUFFER,
)
from .constraints import ScheduleRules
from .offline import responders_for
from .providers import ProviderConfig, Providers, create_provider

_LOGGER = logging.getLogger(__name__)

DEFAULT_REWARD_MODEL = "itinerary-reward"
DEFAULT_OUTPUT_DIR = "out"

POSITIVE = vol.All(vol.Coerce(float), vol.Range(min=0, min_included=False))
MINUTES = vol.All(vol.Coerce(int), vol.Range(min=0))
COUNT = vol.All(vol.Coerce(int), vol.Range(min=1))


def clock_text(value):
    """Validate an HH:MM clock string."""
    try:
        parse_clock(value)
    except ValueError as ex:
        raise vol.Invalid(f"invalid clock {value!r}") from ex
    return value


def _ordered(low, high, strict=False):
    def check(section):
        if section[low] > section[high] or (strict and section[low] == section[high]):
            raise vol.Invalid(f"{low} must be {'<' if strict else '<='} {high}")
        return section

    return check


def provider_schema(model):
    """Return the schema of one provider role."""
    return vol.Schema(
        {
            vol.Optional(CONF_MOCK, default=True): bool,
            vol.Optional(CONF_ENDPOINT_URL, default=DEFAULT_ENDPOINT_URL): str,
            vol.Optional(CONF_API_KEY_ENV, default=DEFAULT_API_KEY_ENV): str,
            vol.Optional(CONF_MODEL, default=model): str,
            vol.Optional(CONF_TIMEOUT, default=DEFAULT_TIMEOUT): POSITIVE,
            vol.Optional(CONF_MAX_RETRIES, default=DEFAULT_MAX_RETRIES): vol.All(
                vol.Coerce(int), vol.Range(min=0)
            ),
            vol.Optional(CONF_PARALLELISM, default=DEFAULT_PARALLELISM): COUNT,
        }
    )


PROVIDERS_SCHEMA = vol.Schema(
    {
        vol.Optional(CONF_CHAT, default={}): provider_schema(DEFAULT_CHAT_MODEL),
        vol.Optional(CONF_EMBED, default={}): provider_schema(DEFAULT_EMBED_MODEL),
        vol.Optional(CONF_REWARD, default={}): provider_schema(DEFAULT_REWARD_MODEL),
        vol.Optional(CONF_JUDGE, default={}): provider_schema(DEFAULT_CHAT_MODEL),
    }
)

RECALL_SCHEMA = vol.All(
    vol.Schema(
        {
            vol.Optional(CONF_SEMANTIC_PER_DAY, default=DEFAULT_SEMANTIC_PER_DAY): COUNT,
            vol.Optional(CONF_TOTAL_PER_DAY, default=DEFAULT_TOTAL_PER_DAY): COUNT,
            vol.Optional(CONF_GRADE_FLOOR, default="4A"): vol.In(GRADES),
        }
    ),
    _ordered(CONF_SEMANTIC_PER_DAY, CONF_TOTAL_PER_DAY),
)

CLUSTER_SCHEMA = vol.All(
    vol.Schema(
        {
            vol.Optional(CONF_MIN_SAMPLES, default=DEFAULT_MIN_SAMPLES): COUNT,
            vol.Optional(CONF_EPS0, default=DEFAULT_EPS0): POSITIVE,
            vol.Optional(CONF_EPS_DECAY, default=DEFAULT_EPS_DECAY): vol.All(
                vol.Coerce(float), vol.Range(min=0, max=1, min_included=False, max_included=False)
            ),
            vol.Optional(CONF_EPS_FLOOR, default=DEFAULT_EPS_FLOOR): POSITIVE,
        }
    ),
    _ordered(CONF_EPS_FLOOR, CONF_EPS0, strict=True),
)

CCOT_SCHEMA = vol.All(
    vol.Schema(
        {
            vol.Optional(CONF_MIN_AGENTS, default=DEFAULT_MIN_AGENTS): COUNT,
            vol.Optional(CONF_MAX_AGENTS, default=DEFAULT_MAX_AGENTS): COUNT,
            vol.Optional(CONF_TOP_K, default=DEFAULT_TOP_K): COUNT,
            vol.Optional(CONF_SMOOTHING, default=DEFAULT_SMOOTHING): POSITIVE,
        }
    ),
    _ordered(CONF_MIN_AGENTS, CONF_MAX_AGENTS),
)

GATE_SCHEMA = vol.Schema(
    {
        vol.Optional(CONF_TAU, default=DEFAULT_TAU): vol.All(
            vol.Coerce(float), vol.Range(min=0, max=1, min_included=False, max_included=False)
        ),
        vol.Optional(CONF_K, default=DEFAULT_K): POSITIVE,
    }
)

GSPO_SCHEMA = vol.Schema(
    {
        vol.Optional(CONF_EPS_LOW, default=DEFAULT_EPS_LOW): POSITIVE,
        vol.Optional(CONF_EPS_HIGH, default=DEFAULT_EPS_HIGH): POSITIVE,
    }
)

REWARD_SCHEMA = vol.Schema(
    {vol.Optional(CONF_REFERENCE_KM, default=DEFAULT_REFERENCE_KM): POSITIVE}
)

SCHEDULE_SCHEMA = vol.Schema(
    {
        vol.Optional(CONF_MIN_TRANSFER, default=MIN_TRANSFER): MINUTES,
        vol.Optional(CONF_IMPLICIT_TRANSFER, default=IMPLICIT_TRANSFER): MINUTES,
        vol.Optional(CONF_MAX_IDLE, default=MAX_IDLE): MINUTES,
        vol.Optional(CONF_DAY_END, default=format_clock(DAY_END)): clock_text,
        vol.Optional(CONF_FLIGHT_BUFFER, default=FLIGHT_BUFFER): MINUTES,
        vol.Optional(CONF_TRAIN_BUFFER, default=TRAIN_BUFFER): MINUTES,
    }
)

EVALUATION_SCHEMA = vol.Schema(
    {
        vol.Optional(CONF_MEAL_TOLERANCE, default=DEFAULT_MEAL_TOLERANCE): vol.All(
            vol.Coerce(float), vol.Range(min=0)
        ),
        vol.Optional(CONF_ROUTE_RATIO, default=DEFAULT_ROUTE_RATIO): POSITIVE,
    }
)

CONFIG_SCHEMA = vol.Schema(
    {
        vol.Optional(CONF_SANDBOX, default=None): vol.Any(None, str),
        vol.Optional(CONF_OUTPUT_DIR, default=DEFAULT_OUTPUT_DIR): str,
        vol.Optional(CONF_SEED, default=0): vol.All(vol.Coerce(int), vol.Range(min=0)),
        vol.Optional(CONF_PROVIDERS, default={}): PROVIDERS_SCHEMA,
        vol.Optional(CONF_RECALL, default={}): RECALL_SCHEMA,
        vol.Optional(CONF_CLUSTER, default={}): CLUSTER_SCHEMA,
        vol.Optional(CONF_CCOT, default={}): CCOT_SCHEMA,
        vol.Optional(CONF_GATE, default={}): GATE_SCHEMA,
        vol.Optional(CONF_GSPO, default={}): GSPO_SCHEMA,
        vol.Optional(CONF_REWARD, default={}): REWARD_SCHEMA,
        vol.Optional(CONF_SCHEDULE, default={}): SCHEDULE_SCHEMA,
        vol.Optional(CONF_EVALUATION, default={}): EVALUATION_SCHEMA,
    }
)


def validate_config(raw):
    """Return the config with every default filled in."""
    try:
        return CONFIG_SCHEMA(raw or {})
    except vol.Invalid as ex:
        raise ConfigError(f"invalid config: {ex}") from ex


def _override_value(text):
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def apply_overrides(raw, overrides):
    """Return a copy of raw with `section.key=value` pairs applied.

    Values are read as JSON when they parse, else kept as strings.
    """
    config = json.loads(json.dumps(raw or {}))
    for item in overrides or ():
        path, sep, value = item.partition("=")
        keys = [key for key in path.strip().split(".") if key]
        if not sep or not keys:
            raise ConfigError(f"override {item!r} is not section.key=value")
        target = config
        for key in keys[:-1]:
            target = target.setdefault(key, {})
            if not isinstance(target, dict):
                raise ConfigError(f"override {item!r} descends into a value")
        target[keys[-1]] = _override_value(value)
        _LOGGER.debug("Override %s = %r", path, target[keys[-1]])
    return config


def load_config(path=None, overrides=()):
    """Read, override and validate a config file (defaults only if no path)."""
    raw = load_json(path) if path else {}
    if not isinstance(raw, dict):
        raise ConfigError("config document must be an object")
    return validate_config(apply_overrides(raw, overrides))


def config_hash(config):
    """Return the hash recorded in every artifact a config produces."""
    return sha256_hex(canonical_bytes(config))


def check_hash(config, artifact_hash):
    """Raise ConfigMismatch if an artifact came from another config."""
    expected = config_hash(config)
    if artifact_hash and artifact_hash != expected:
        raise ConfigMismatch(
            f"artifact config hash {artifact_hash[:12]} differs from {expected[:12]}"
        )


def build_providers(config, sandbox=None, transcript=None, replay=None):
    """Return the Providers of a config.

    Mock chat answers come from the offline responders of `sandbox`.
    """
    seed = config[CONF_SEED]
    conf = config[CONF_PROVIDERS]
    responders = None
    if sandbox is not None:
        responders = responders_for(sandbox, ScheduleRules.from_config(config[CONF_SCHEDULE]))

    def make(role, **options):
        provider = create_provider(
            ProviderConfig.from_dict(role, conf[role]),
            transcript=transcript,
            seed=seed,
            replay=replay,
            **options,
        )
        _LOGGER.debug("Provider for %s: %r", role, provider)
        return provider

    return Providers(
        chat=make(CONF_CHAT, responders=responders),
        embed=make(CONF_EMBED),
        reward=make(CONF_REWARD),
        judge=make(CONF_JUDGE),
    )


async def close_providers(providers):
    """Close every provider of a Providers tuple."""
    for provider in providers:
        await provider.close()


class ConfigError(TourPlannerError):
    """Error to indicate an invalid configuration."""


class ConfigMismatch(TourPlannerError):
    """Error to indicate an artifact produced under another config."""
