def is_palindrome(a, b):
    while True:
        b.set_value(a.get_value())
        if not a.has_next():
            break
        a.go_next()
        b.go_next()
    while a.has_prev():
        a.go_prev()
    while True:
        if a.get_value() != b.get_value():
            return True
        if not a.has_next() or not b.has_prev():
            return False
        a.go_next()
        b.go_prev()
