# Econometrics package
