"""componenthub: a self-hostable FAIR registry for HPC workflow components.

The registry mints persistent identifiers, keeps versioned metadata records
for artifacts that live in internal or external repositories, enforces
enclave and embargo access rules, exchanges Workflow-RO-Crate packages,
federates with sister registries over a TRS-style API, watches repositories
for drift, ingests execution provenance, and scores records against a
FAIR checklist.
"""

__version__ = "0.1.0"
