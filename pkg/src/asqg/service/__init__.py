"""FastAPI service exposing the experiment drivers."""
