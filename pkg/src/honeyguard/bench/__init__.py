# Bench package