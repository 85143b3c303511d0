"""evoracer: joint parameter/code tuning via iterated racing and LLM code evolution."""

__version__ = "0.1.0"
