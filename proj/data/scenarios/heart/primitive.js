function initializeParams() {
    return {
        heartPositionX: Math.floor(ShapeDisplay.grid_x / 2),
        heartPositionY: Math.floor(ShapeDisplay.grid_y / 2),
        heartScale: 7, // half-width of the heart in pins
        heartHeight: 50,
    };
}

// Implicit heart curve (x^2 + y^2 - 1)^3 - x^2 y^3 <= 0, y pointing up.
function insideHeart(x, y) {
    const a = x * x + y * y - 1;
    return a * a * a - x * x * y * y * y <= 0;
}

function dynamicScript(deltaTime, params) {
    const { heartPositionX, heartPositionY, heartScale, heartHeight } = params;
    if (heartScale <= 0) return;
    ShapeDisplay.Pins.forEach((pin, index) => {
        const x = ((index % ShapeDisplay.grid_x) - heartPositionX) / heartScale;
        const y = -(Math.floor(index / ShapeDisplay.grid_x) - heartPositionY) / heartScale;
        if (insideHeart(x * 1.2, y * 1.2 + 0.2)) {
            pin.setPos(heartHeight);
        }
    });
}
