"""SnapPattern: non-intrusive cloud design pattern injection for service pipelines.

The toolkit interposes a configurable pattern proxy in front of existing
services by rewriting Kubernetes manifests (DNS swap), generates ramping
workloads against the pipeline, and collects namespace-attributed energy and
latency metrics to compare each pattern against the baseline.
"""

__version__ = "0.1.0"
