"""The TourPlanner itinerary planner.

Sample JSON run config with every section (the values shown are the
defaults; any key may be left out):

{
  "sandbox": "data/sandbox.json",
  "output_dir": "out",
  "seed": 0,
  "providers": {
    "chat": {
      "mock": true,              # false to call an OpenAI-compatible endpoint
      "endpoint_url": "https://api.openai.com/v1",
      "api_key_env": "OPENAI_API_KEY",
      "model": "gpt-4o-mini",
      "timeout": 60,
      "max_retries": 2,
      "parallelism": 4
    },
    "embed": {"model": "text-embedding-3-small"},
    "reward": {"model": "itinerary-reward"},   # POST {endpoint_url}/reward
    "judge": {"model": "gpt-4o-mini"}
  },
  "recall": {"semantic_per_day": 3, "total_per_day": 9, "landmark_grade_floor": "4A"},
  "cluster": {"min_samples": 4, "eps0": 1.0, "eps_decay": 0.8, "eps_floor": 0.1},
  "ccot": {"min_agents": 4, "max_agents": 6, "top_k": 3, "smoothing": 0.01},
  "gate": {"tau": 0.75, "k": 28},
  "gspo": {"eps_low": 0.0003, "eps_high": 0.0004},
  "reward": {"reference_distance_km": 3.0},
  "schedule": {
    "min_transfer_minutes": 30,
    "implicit_transfer_minutes": 15,
    "max_idle_minutes": 60,
    "day_end": "22:30",
    "flight_buffer_minutes": 120,
    "train_buffer_minutes": 60
  },
  "evaluation": {"meal_price_tolerance": 0.5, "route_length_ratio": 1.5}
}

Comments are for reading only; config files are plain JSON. Single values
can be overridden on the command line with `--set ccot.top_k=2`.
"""
