def move(a, n):
    for _ in range(n):
        a.go_next()
    return a.get_value()
