def move(a, n):
    for _ in range(n - 1):
        if not a.has_next():
            break
        a.go_next()
    return a.get_value()
