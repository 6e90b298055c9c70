"""Shared test data: a small Xi'an sandbox and hand-built day plans."""
from dataclasses import replace

from tourplanner.ccot import PlanningContext
from tourplanner.itinerary import Proposal, enrich

ORIGIN = "Wuhan"
DEST = "Xi'an"

QUERY = (
    "I am looking for a 2-day trip from Wuhan to Xi'an, departing on Thursday "
    "early morning and returning on Friday afternoon, with a budget of ¥4100. "
    "I'm interested in historical sites and museums, along with enjoying diverse "
    "cuisines like barbecue, hot pot, Korean, and Japanese dishes."
)

SYNTHETIC_QUERY = (
    "I am looking for a 3-day trip from Wuhan to Xi'an, departing on Thursday "
    "morning and returning on Saturday evening, with a budget of ¥4100. I'm "
    "interested in historical sites and museums, along with enjoying diverse "
    "cuisines like barbecue, hot pot, Korean, and Japanese dishes."
)

SANDBOX_DOCUMENT = {
    "schema_version": 1,
    "cities": [
        {"name": "Wuhan", "lat": 30.5928, "lon": 114.3055},
        {"name": "Xi'an", "lat": 34.3416, "lon": 108.9398},
    ],
    "attractions": [
        {
            "id": "xa-001",
            "name": "Shaanxi History Museum",
            "city": "Xi'an",
            "lat": 34.2247,
            "lon": 108.9543,
            "grade": "5A",
            "popularity": 98,
            "rating": 4.8,
            "entrance_fee": 0,
            "opening": "09:00-17:30",
            "last_admission": "16:00",
            "duration": "0.5-1 day",
            "feature_text": "national history museum with Tang dynasty relics",
        },
        {
            "id": "xa-002",
            "name": "Xi'an Museum",
            "city": "Xi'an",
            "lat": 34.2386,
            "lon": 108.9423,
            "grade": "4A",
            "popularity": 85,
            "rating": 4.6,
            "entrance_fee": 0,
            "opening": "09:00-17:30",
            "duration": "2-3 hours",
            "feature_text": "city museum beside the Small Wild Goose Pagoda",
        },
        {
            "id": "xa-003",
            "name": "Big Wild Goose Pagoda",
            "city": "Xi'an",
            "lat": 34.2192,
            "lon": 108.9642,
            "grade": "5A",
            "popularity": 95,
            "rating": 4.7,
            "entrance_fee": 40,
            "opening": "08:00-18:00",
            "duration": "2-4 hours",
            "feature_text": "ancient buddhist pagoda and temple grounds",
        },
        {
            "id": "xa-004",
            "name": "Bell Tower",
            "city": "Xi'an",
            "lat": 34.2610,
            "lon": 108.9423,
            "grade": "4A",
            "popularity": 80,
            "rating": 4.5,
            "entrance_fee": 30,
            "opening": "08:30-18:30",
            "last_admission": "12:30",
            "duration": "1-3 hours",
            "feature_text": "ming dynasty bell tower in the city center",
        },
        {
            "id": "xa-005",
            "name": "Muslim Quarter",
            "city": "Xi'an",
            "lat": 34.2640,
            "lon": 108.9410,
            "grade": "3A",
            "popularity": 90,
            "rating": 4.4,
            "opening": "10:00-22:00",
            "duration": "1-2 hours",
            "feature_text": "food street with local snacks",
            "food_district": True,
        },
    ],
    "restaurants": [
        {
            "id": "xr-001",
            "name": "Beijing Zhengyangmen Roast Duck Restaurant",
            "city": "Xi'an",
            "lat": 34.2310,
            "lon": 108.9480,
            "cuisine": "Beijing Cuisine",
            "avg_price": 121.5,
            "rating": 4.5,
        },
        {
            "id": "xr-002",
            "name": "Haocheng Zhen Yangcheng Lake Hairy Crab",
            "city": "Xi'an",
            "lat": 34.2200,
            "lon": 108.9600,
            "cuisine": "Crayfish",
            "avg_price": 120,
            "rating": 4.3,
        },
        {
            "id": "xr-003",
            "name": "Alley old hot pot",
            "city": "Xi'an",
            "lat": 34.2450,
            "lon": 108.9440,
            "cuisine": "Hot Pot",
            "avg_price": 130.5,
            "rating": 4.6,
        },
        {
            "id": "xr-004",
            "name": "Defachang Dumpling House",
            "city": "Xi'an",
            "lat": 34.2600,
            "lon": 108.9450,
            "cuisine": "Wontons and Dumplings",
            "avg_price": 95,
            "rating": 4.2,
        },
    ],
    "hotels": [
        {
            "id": "xh-001",
            "name": "Kunyi Hotel",
            "city": "Xi'an",
            "lat": 34.2300,
            "lon": 108.9500,
            "category": "Upscale",
            "price_per_night": 387,
            "rating": 4.5,
        },
        {
            "id": "xh-002",
            "name": "Jinjiang Inn Bell Tower",
            "city": "Xi'an",
            "lat": 34.2590,
            "lon": 108.9430,
            "category": "Economy",
            "price_per_night": 168,
        },
        {
            "id": "xh-003",
            "name": "Sofitel Renmin Square",
            "city": "Xi'an",
            "lat": 34.2700,
            "lon": 108.9550,
            "category": "Luxury",
            "price_per_night": 980,
        },
    ],
    "transport": [
        {
            "id": "CA8219",
            "mode": "flight",
            "origin_city": "Wuhan",
            "dest_city": "Xi'an",
            "depart": "07:45",
            "arrive": "09:20",
            "price": 340,
        },
        {
            "id": "G818",
            "mode": "train",
            "origin_city": "Wuhan",
            "dest_city": "Xi'an",
            "depart": "13:05",
            "arrive": "17:40",
            "price": 460,
        },
        {
            "id": "CZ3890",
            "mode": "flight",
            "origin_city": "Xi'an",
            "dest_city": "Wuhan",
            "depart": "17:35",
            "arrive": "19:20",
            "price": 500,
        },
        {
            "id": "G857",
            "mode": "train",
            "origin_city": "Xi'an",
            "dest_city": "Wuhan",
            "depart": "19:10",
            "arrive": "23:50",
            "price": 470,
        },
    ],
}

DAY_ONE = [
    {"time": "07:45-09:20", "activity type": "transportation", "name": "CA8219"},
    {"time": "10:15-10:45", "activity type": "check-in", "name": "Kunyi Hotel"},
    {
        "time": "11:05-12:05",
        "activity type": "meal",
        "name": "Beijing Zhengyangmen Roast Duck Restaurant",
    },
    {"time": "12:30-17:30", "activity type": "sightseeing", "name": "Shaanxi History Museum"},
    {
        "time": "17:50-19:20",
        "activity type": "meal",
        "name": "Haocheng Zhen Yangcheng Lake Hairy Crab",
    },
]

MIDDLE_DAY = [
    {"time": "08:30-09:00", "activity type": "local_transfer", "name": "Transfer to Xi'an Museum"},
    {"time": "09:00-11:30", "activity type": "sightseeing", "name": "Xi'an Museum"},
    {"time": "11:50-12:50", "activity type": "meal", "name": "Alley old hot pot"},
    {"time": "13:10-16:40", "activity type": "sightseeing", "name": "Big Wild Goose Pagoda"},
    {"time": "17:00-18:00", "activity type": "meal", "name": "Defachang Dumpling House"},
    {"time": "18:20-18:50", "activity type": "local_transfer", "name": "Transfer to Kunyi Hotel"},
]

LAST_DAY = [
    {"time": "09:00-09:30", "activity type": "local_transfer", "name": "Transfer to Xi'an Museum"},
    {"time": "09:30-12:00", "activity type": "sightseeing", "name": "Xi'an Museum"},
    {"time": "12:20-13:20", "activity type": "meal", "name": "Alley old hot pot"},
    {"time": "13:40-14:10", "activity type": "check-out", "name": "Kunyi Hotel"},
    {"time": "14:10-14:55", "activity type": "local_transfer", "name": "Transfer to the airport"},
    {"time": "17:35-19:20", "activity type": "transportation", "name": "CZ3890"},
]


def day(steps, label="Day 1", agent_id="fixture"):
    """Return a Proposal made of step documents."""
    return Proposal.from_dict({"plan": steps}, agent_id=agent_id, day_label=label)


def priced(sandbox, steps, label="Day 1"):
    """Return a Proposal with sandbox prices filled in."""
    return enrich(day(steps, label), sandbox, ORIGIN, DEST)


def with_step(steps, index, **changes):
    """Return a copy of step documents with one step changed."""
    steps = [dict(step) for step in steps]
    for key, value in changes.items():
        steps[index]["activity type" if key == "activity_type" else key] = value
    return steps


def without_step(steps, index):
    """Return a copy of step documents without one step."""
    return [dict(step) for number, step in enumerate(steps) if number != index]


def planning_context(sandbox, profile, role="first", label="Day 1", used_ids=frozenset()):
    """Return the context of one day of the fixture trip."""
    return PlanningContext(
        day_index=int(label.split()[-1]),
        day_label=label,
        role=role,
        sandbox=sandbox,
        profile=profile,
        origin=ORIGIN,
        dest=DEST,
        hotel=sandbox.get("hotel", "xh-001"),
        outbound=sandbox.get("transport", "CA8219"),
        inbound=sandbox.get("transport", "CZ3890"),
        attractions=sandbox.in_city("attraction", DEST),
        restaurants=sandbox.in_city("restaurant", DEST),
        used_ids=frozenset(used_ids),
    )


def dawn_visit_on(label, plan_day):
    """Wrap plan_day so the first sightseeing of one day starts at 05:00."""

    async def wrapped(ctx, *args, **kwargs):
        plan, record = await plan_day(ctx, *args, **kwargs)
        if ctx.day_label != label:
            return plan, record
        steps = list(plan.steps)
        index = next(i for i, step in enumerate(steps) if step.activity_type == "sightseeing")
        steps[index] = replace(steps[index], start=300, end=330)
        return replace(plan, steps=tuple(steps)), record

    return wrapped
