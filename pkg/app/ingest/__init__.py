# Corpus ingestion package
