"""Model files, vector files and CSV export."""
from data.model_io import (
    MODEL_SCHEMA,
    parse_model_document,
    load_model_text,
    load_model,
    load_reservoir_model,
    model_to_document,
    save_model,
    parse_vector,
    load_vector,
)
from data.export import dataframe_to_csv, write_trajectory_csv, write_catalog_csv

__all__ = [
    "MODEL_SCHEMA",
    "parse_model_document",
    "load_model_text",
    "load_model",
    "load_reservoir_model",
    "model_to_document",
    "save_model",
    "parse_vector",
    "load_vector",
    "dataframe_to_csv",
    "write_trajectory_csv",
    "write_catalog_csv",
]
