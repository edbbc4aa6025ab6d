# Ingest package