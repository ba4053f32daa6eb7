"""Shared fixtures: sample class vectors, certificates and config files."""

import pytest

from ampleforge.certificates import base_leaf, glue_node
from ampleforge.lattice import homogeneous, parse_vector
from ampleforge.prover import SearchLimits


@pytest.fixture
def pullback_10():
    """(10; 3^7, 6): reduces to the pullback (1; 0^8)."""
    return parse_vector("10;3^7,6")


@pytest.fixture
def glue_certificate():
    """(3; 1^9) as the two-heavy (3; 2, 1^5) glued with (2; 1^4) at slot 1."""
    outer = base_leaf(parse_vector("3;2,1^5"))
    inner = base_leaf(homogeneous(2, 1, 4))
    return glue_node(outer, 1, inner)


@pytest.fixture
def small_limits():
    """Search limits small enough for quick unit tests."""
    return SearchLimits(max_depth=6, node_budget=20_000, max_inner_degree=16)


@pytest.fixture
def sample_config_yaml(tmp_path):
    """Create a temporary YAML config file."""
    yaml_content = """search:
  max_depth: 5
  node_budget: 1234
  max_inner_degree: 20
  jobs: 2

probe:
  degree_bound: 40
  max_members: 7

table:
  max_n: 20
  certificate_dir: certs

verify:
  strict: true
"""
    config_file = tmp_path / "ampleforge.yaml"
    config_file.write_text(yaml_content)
    return str(config_file)
