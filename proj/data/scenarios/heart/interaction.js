function initializeInteractionParameters() {
    return {
        buttons: [
            {
                id: 1, // moves the heart to the left
                size: 1,
                position: [Math.floor(ShapeDisplay.grid_x / 3), ShapeDisplay.grid_y - 4],
                init_height: 50,
            },
            {
                id: 2, // moves the heart to the right
                size: 1,
                position: [Math.floor((2 * ShapeDisplay.grid_x) / 3), ShapeDisplay.grid_y - 4],
                init_height: 50,
            },
        ],
        moveSpeed: 0.1,
    };
}

function dynamicInteraction(deltaTime, params, parentParams) {
    initializeButtons(params);
    ShapeDisplay.Pins.forEach((pin) => {
        if (!pin.isButton || !pin.isPressing) return;
        if (pin.buttonGroup_id == 1) {
            parentParams.heartPositionX -= params.moveSpeed;
        } else if (pin.buttonGroup_id == 2) {
            parentParams.heartPositionX += params.moveSpeed;
        }
    });
}
