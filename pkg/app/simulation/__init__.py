# Collaboration matching simulation package
