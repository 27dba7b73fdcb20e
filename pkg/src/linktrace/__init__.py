"""Design-based snowball sampling toolkit.

Draw link-tracing samples from a network population, estimate each sampled
unit's relative inclusion probability by resampling the observed sample
network, and feed those frequencies into weighted-ratio estimators with
design variances and normal-theory intervals. A Monte Carlo harness compares
the resampled-weight estimator against the sample mean and the classical
degree-weighted baseline; a spatial adapter maps gridded counts onto the
same machinery.
"""

from .design import (SEED, DesignConfig, DesignError, DesignKind, Event,
                     ObservedData, SampleRecord, draw_sample, observe,
                     read_observed, write_events_csv, write_observed)
from .estimators import (EstimateResult, EstimatorError, EstimatorTag,
                         VariableKind, VariableSpec, WeightSource, WeightVector,
                         confidence_interval, evaluate, extract_variable, hajek,
                         parse_variable, sample_mean, variance_hajek, vh,
                         write_estimates_csv)
from .graph import (AttributeTable, GraphError, MissingPolicy, Network,
                    induced_subgraph, load_attributes, load_edge_list,
                    read_edge_pairs, write_attributes_csv)
from .harness import (GeneratorSpec, HarnessError, ParabolaFit, PopulationPaths,
                      SimConfig, SimulationReport, coverage, fit_parabola,
                      generate_synthetic_population, mse_decomposition,
                      relative_efficiency, run, write_all)
from .resampler import (FrequencyTable, ResampleConfig, ResampleError,
                        ResampleMode, default_inner_design, estimate_frequencies,
                        read_frequencies_csv, write_frequencies_csv)
from .spatial import (Adjacency, Grid, SpatialError, SpatialRule, cell_label,
                      grid_to_network, load_grid)

__version__ = "0.1.0"
