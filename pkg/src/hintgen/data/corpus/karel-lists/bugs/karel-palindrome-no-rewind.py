def is_palindrome(a, b):
    while True:
        b.set_value(a.get_value())
        if not a.has_next():
            break
        a.go_next()
        b.go_next()
    while True:
        if a.get_value() != b.get_value():
            return False
        if not a.has_prev() or not b.has_prev():
            return True
        a.go_prev()
        b.go_prev()
