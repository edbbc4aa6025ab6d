# Adapt package