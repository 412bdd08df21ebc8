"""Team belief DAGs for two-team zero-sum games."""
