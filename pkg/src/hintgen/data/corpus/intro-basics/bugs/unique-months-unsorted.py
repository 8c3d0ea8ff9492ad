def unique_months(dates):
    months = []
    for day, month in dates:
        if month not in months:
            months.append(month)
    return months
