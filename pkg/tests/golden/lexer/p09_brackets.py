matrix = [
    [1, 2, 3],
    [4, 5, 6],
]
flat = [v
        for row in matrix
        for v in row]
