"""Joint Bayesian inference of transcript expression and differential
expression between two read samples, with read-sharing cluster parallelism."""

from .clusters import augment_cluster, build_clusters, whole_set_cluster
from .decisions import fdr_threshold_select, loss_threshold, naive_rule
from .ingest import AlignmentSet, TranscriptCatalog, load_alignment_set
from .model import PriorConfig, dead_alive_sets, map_free_to_expression
from .runner import RunConfig, orchestrate
from .samplers import ChainConfig, run_chain, run_ensemble
from .synth import ScenarioSpec, brute_force_posterior, generate_scenario

__version__ = "0.1.0"

__all__ = [
    "AlignmentSet",
    "ChainConfig",
    "PriorConfig",
    "RunConfig",
    "ScenarioSpec",
    "TranscriptCatalog",
    "augment_cluster",
    "brute_force_posterior",
    "build_clusters",
    "dead_alive_sets",
    "fdr_threshold_select",
    "generate_scenario",
    "load_alignment_set",
    "loss_threshold",
    "map_free_to_expression",
    "naive_rule",
    "orchestrate",
    "run_chain",
    "run_ensemble",
    "whole_set_cluster",
]
