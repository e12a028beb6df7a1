# Novelty index, knowledge sweep and citation outcome
